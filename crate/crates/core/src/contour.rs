//! Even-variable contour integration: `∫_γ dx u(x) = ∫_a^b dt γ'(t) u(γ(t))`.

use std::fmt;
use std::sync::Arc;

use crate::algebra::{Grassmann, Parity};
use crate::error::{Error, Result};
use crate::poly::SuperPoly;
use crate::quadrature::{integrate_box, IntegrationMode};
use crate::scalar::Scalar;
use crate::supermatrix::Mat;
use crate::supersmooth::{compose, is_superdiffeo, BodyBox, SuperDomain, SuperMap, SupersmoothFn};

/// Smooth even-valued curve given by callbacks.
pub trait CurveFn<S: Scalar>: Send + Sync + fmt::Debug {
    fn value(&self, t: &S) -> Grassmann<S>;
    fn derivative(&self, t: &S) -> Grassmann<S>;
}

#[derive(Clone, Debug)]
enum Shape<S: Scalar> {
    /// Polynomial in `t` with Grassmann coefficients.
    Poly(SuperPoly<S>),
    Curve(Arc<dyn CurveFn<S>>),
}

#[derive(Clone, Debug)]
struct Segment<S: Scalar> {
    a: S,
    b: S,
    shape: Shape<S>,
}

impl<S: Scalar> Segment<S> {
    fn value(&self, t: &S) -> Grassmann<S> {
        match &self.shape {
            Shape::Poly(p) => p.eval_real(std::slice::from_ref(t)),
            Shape::Curve(c) => c.value(t),
        }
    }

    fn derivative(&self, t: &S) -> Grassmann<S> {
        match &self.shape {
            Shape::Poly(p) => p.derivative(0).eval_real(std::slice::from_ref(t)),
            Shape::Curve(c) => c.derivative(t),
        }
    }
}

/// Piecewise C¹ curve in the even part of the algebra.
#[derive(Clone, Debug)]
pub struct Path<S: Scalar> {
    segments: Vec<Segment<S>>,
}

fn affine<S: Scalar>(c0: S, c1: S) -> SuperPoly<S> {
    SuperPoly::univariate(&[c0, c1], 0)
}

impl<S: Scalar> Path<S> {
    /// `γ(t) = Σ_k c_k t^k` on `[a, b]`.
    pub fn polynomial(a: S, b: S, poly: SuperPoly<S>) -> Result<Self> {
        if poly.nvars() != 1 {
            return Err(Error::DimensionMismatch(
                "path polynomial must have one variable".into(),
            ));
        }
        if !poly.is_zero() && poly.parity() != Parity::Even {
            return Err(Error::ParityViolation("path values must be even".into()));
        }
        if a > b {
            return Err(Error::Precondition(
                "path interval must satisfy a <= b".into(),
            ));
        }
        Ok(Path {
            segments: vec![Segment {
                a,
                b,
                shape: Shape::Poly(poly),
            }],
        })
    }

    /// The straight line `λ + t(μ − λ)` on `[0, 1]`.
    pub fn straight(lambda: &Grassmann<S>, mu: &Grassmann<S>) -> Result<Self> {
        let level = lambda.level().max(mu.level());
        let (l, m) = (lambda.lift(level), mu.lift(level));
        let d = &m - &l;
        Self::polynomial(
            S::zero(),
            S::one(),
            SuperPoly::univariate_grassmann(&[l, d], level),
        )
    }

    pub fn curve(a: S, b: S, curve: Arc<dyn CurveFn<S>>) -> Result<Self> {
        if a > b {
            return Err(Error::Precondition(
                "path interval must satisfy a <= b".into(),
            ));
        }
        Ok(Path {
            segments: vec![Segment {
                a,
                b,
                shape: Shape::Curve(curve),
            }],
        })
    }

    pub fn interval(&self) -> (S, S) {
        (
            self.segments[0].a.clone(),
            self.segments.last().expect("nonempty").b.clone(),
        )
    }

    pub fn num_segments(&self) -> usize {
        self.segments.len()
    }

    pub fn is_polynomial(&self) -> bool {
        self.segments
            .iter()
            .all(|s| matches!(s.shape, Shape::Poly(_)))
    }

    fn segment_at(&self, t: &S) -> &Segment<S> {
        self.segments
            .iter()
            .find(|s| t <= &s.b)
            .unwrap_or_else(|| self.segments.last().expect("nonempty"))
    }

    pub fn value(&self, t: &S) -> Grassmann<S> {
        self.segment_at(t).value(t)
    }

    pub fn derivative(&self, t: &S) -> Grassmann<S> {
        self.segment_at(t).derivative(t)
    }

    /// `λ = γ(a)`.
    pub fn start(&self) -> Grassmann<S> {
        let s = &self.segments[0];
        s.value(&s.a)
    }

    /// `μ = γ(b)`.
    pub fn end(&self) -> Grassmann<S> {
        let s = self.segments.last().expect("nonempty");
        s.value(&s.b)
    }

    fn shifted(&self, shift: &S) -> Self {
        let segments = self
            .segments
            .iter()
            .map(|s| {
                let shape = match &s.shape {
                    Shape::Poly(p) => {
                        let arg = affine(-shift.clone(), S::one()).lift(p.level());
                        Shape::Poly(p.eval_ring(&[arg], &SuperPoly::zero(1, p.level())))
                    }
                    Shape::Curve(c) => Shape::Curve(Arc::new(Shifted {
                        inner: c.clone(),
                        shift: shift.clone(),
                    })),
                };
                Segment {
                    a: s.a.clone() + shift.clone(),
                    b: s.b.clone() + shift.clone(),
                    shape,
                }
            })
            .collect();
        Path { segments }
    }
}

impl<S: Scalar> CurveFn<S> for Path<S> {
    fn value(&self, t: &S) -> Grassmann<S> {
        Path::value(self, t)
    }

    fn derivative(&self, t: &S) -> Grassmann<S> {
        Path::derivative(self, t)
    }
}

#[derive(Debug)]
struct Shifted<S: Scalar> {
    inner: Arc<dyn CurveFn<S>>,
    shift: S,
}

impl<S: Scalar> CurveFn<S> for Shifted<S> {
    fn value(&self, t: &S) -> Grassmann<S> {
        self.inner.value(&(t.clone() - self.shift.clone()))
    }

    fn derivative(&self, t: &S) -> Grassmann<S> {
        self.inner.derivative(&(t.clone() - self.shift.clone()))
    }
}

#[derive(Debug)]
struct Reversed<S: Scalar> {
    inner: Arc<dyn CurveFn<S>>,
    total: S,
}

impl<S: Scalar> CurveFn<S> for Reversed<S> {
    fn value(&self, t: &S) -> Grassmann<S> {
        self.inner.value(&(self.total.clone() - t.clone()))
    }

    fn derivative(&self, t: &S) -> Grassmann<S> {
        -self.inner.derivative(&(self.total.clone() - t.clone()))
    }
}

#[derive(Debug)]
struct Reparam<S: Scalar> {
    inner: Path<S>,
    phi: SuperPoly<S>,
    dphi: SuperPoly<S>,
}

impl<S: Scalar> CurveFn<S> for Reparam<S> {
    fn value(&self, s: &S) -> Grassmann<S> {
        self.inner
            .value(&self.phi.eval_real(std::slice::from_ref(s)).body())
    }

    fn derivative(&self, s: &S) -> Grassmann<S> {
        let t = self.phi.eval_real(std::slice::from_ref(s)).body();
        self.inner
            .derivative(&t)
            .scale(&self.dphi.eval_real(std::slice::from_ref(s)).body())
    }
}

fn close<S: Scalar>(a: &S, b: &S) -> bool {
    if S::EXACT {
        a == b
    } else {
        (a.clone() - b.clone()).magnitude() <= 1e-12 * (1.0 + a.magnitude())
    }
}

/// `γ∘φ` for a real polynomial `φ: [c,d] → [a,b]` with `φ' > 0` inside.
pub fn path_reparametrize<S: Scalar>(
    path: &Path<S>,
    phi: &SuperPoly<S>,
    c: S,
    d: S,
) -> Result<Path<S>> {
    if phi.nvars() != 1 || !phi.terms().all(|(_, g)| g.is_scalar()) {
        return Err(Error::Precondition(
            "reparametrization must be a real polynomial in one variable".into(),
        ));
    }
    if c >= d {
        return Err(Error::Precondition(
            "reparametrization interval must satisfy c < d".into(),
        ));
    }
    let phi = phi.with_level(0).map_err(Error::from)?;
    let (a, b) = path.interval();
    let at = |s: &S| phi.eval_real(std::slice::from_ref(s)).body();
    if !close(&at(&c), &a) || !close(&at(&d), &b) {
        return Err(Error::EndpointMismatch(
            "phi(c), phi(d) must equal the path interval".into(),
        ));
    }
    let dphi = phi.derivative(0);
    for i in 1..64 {
        let s = c.clone() + (d.clone() - c.clone()) * S::from_ratio(i, 64);
        if dphi.eval_real(std::slice::from_ref(&s)).body() <= S::zero() {
            return Err(Error::NotMonotone(format!("phi' <= 0 at s = {s}")));
        }
    }
    if let [seg] = path.segments.as_slice() {
        if let Shape::Poly(p) = &seg.shape {
            let arg = phi.lift(p.level());
            let composed = p.eval_ring(&[arg], &SuperPoly::zero(1, p.level()));
            return Path::polynomial(c, d, composed);
        }
    }
    Path::curve(
        c,
        d,
        Arc::new(Reparam {
            inner: path.clone(),
            phi,
            dphi,
        }),
    )
}

/// Concatenation; the second path is shifted to start where the first ends.
pub fn path_sum<S: Scalar>(first: &Path<S>, second: &Path<S>) -> Result<Path<S>> {
    let (c, d) = second.interval();
    if c == d {
        return Ok(first.clone());
    }
    let (lhs, rhs) = (first.end(), second.start());
    let level = lhs.level().max(rhs.level());
    if lhs.lift(level) != rhs.lift(level) {
        return Err(Error::EndpointMismatch(format!("{lhs} vs {rhs}")));
    }
    let (_, b) = first.interval();
    let moved = second.shifted(&(b - c));
    let mut segments = first.segments.clone();
    segments.extend(moved.segments.into_iter().filter(|s| s.a != s.b));
    Ok(Path { segments })
}

/// `(−γ)(t) = γ(a + b − t)`.
pub fn path_inverse<S: Scalar>(path: &Path<S>) -> Path<S> {
    let (a, b) = path.interval();
    let total = a + b;
    let segments = path
        .segments
        .iter()
        .rev()
        .map(|s| {
            let shape = match &s.shape {
                Shape::Poly(p) => {
                    let arg = affine(total.clone(), -S::one()).lift(p.level());
                    Shape::Poly(p.eval_ring(&[arg], &SuperPoly::zero(1, p.level())))
                }
                Shape::Curve(c) => Shape::Curve(Arc::new(Reversed {
                    inner: c.clone(),
                    total: total.clone(),
                })),
            };
            Segment {
                a: total.clone() - s.b.clone(),
                b: total.clone() - s.a.clone(),
                shape,
            }
        })
        .collect();
    Path { segments }
}

fn check_body_in_domain<S: Scalar>(u: &SupersmoothFn<S>, seg: &Segment<S>) -> Result<()> {
    let Some(dom) = u.domain() else { return Ok(()) };
    for i in 0..=32 {
        let t = seg.a.clone() + (seg.b.clone() - seg.a.clone()) * S::from_ratio(i, 32);
        let body = seg.value(&t).body();
        if !dom.contains(std::slice::from_ref(&body)) {
            return Err(Error::OutsideDomain {
                point: vec![body.to_f64()],
            });
        }
    }
    Ok(())
}

/// `∫_γ dx u(x)`, valued `Ũ(μ) − Ũ(λ)` for any antiderivative `U`.
pub fn path_integral<S: Scalar>(
    path: &Path<S>,
    u: &SupersmoothFn<S>,
    mode: &IntegrationMode,
) -> Result<Grassmann<S>> {
    if u.m() != 1 || u.n() != 0 {
        return Err(Error::DimensionMismatch(
            "contour integrand must be a function of one even variable".into(),
        ));
    }
    let mut acc = Grassmann::zero(u.level());
    for seg in &path.segments {
        if seg.a == seg.b {
            continue;
        }
        check_body_in_domain(u, seg)?;
        let part = match (&seg.shape, mode) {
            (Shape::Poly(p), IntegrationMode::Exact) => {
                let coeff = u.coeff_poly(crate::algebra::IndexSet::EMPTY)?;
                let level = p.level().max(u.level());
                let gamma = p.lift(level);
                let along = coeff
                    .lift(level)
                    .eval_ring(std::slice::from_ref(&gamma), &SuperPoly::zero(1, level));
                let integrand = gamma.derivative(0).mul(&along);
                integrand.integrate_var(0, &seg.a, &seg.b).coeff(&[])
            }
            (Shape::Curve(_), IntegrationMode::Exact) => {
                return Err(Error::NotPolynomial(
                    "exact mode needs polynomial path segments".into(),
                ))
            }
            (_, IntegrationMode::Quadrature(spec)) => {
                integrate_box(&[(seg.a.clone(), seg.b.clone())], spec, |t: &[S]| {
                    let x = seg.value(&t[0]);
                    let v = u.ss_eval(std::slice::from_ref(&x), &[])?;
                    let dx = seg.derivative(&t[0]);
                    let level = v.level().max(dx.level());
                    Ok(&dx.lift(level) * &v.lift(level))
                })?
                .value
            }
        };
        let level = acc.level().max(part.level());
        acc = &acc.lift(level) + &part.lift(level);
    }
    Ok(acc)
}

/// `∫_γ dx u − (Ũ(μ) − Ũ(λ))` after checking `U' = u` symbolically.
pub fn fundamental_theorem_check<S: Scalar>(
    path: &Path<S>,
    big_u: &SupersmoothFn<S>,
    u: &SupersmoothFn<S>,
    mode: &IntegrationMode,
) -> Result<Grassmann<S>> {
    if !big_u.is_polynomial() || !u.is_polynomial() {
        return Err(Error::NotPolynomial(
            "antiderivative check is symbolic".into(),
        ));
    }
    let level = big_u.level().max(u.level());
    if big_u.d_even(1)?.with_level(level)? != u.with_level(level)? {
        return Err(Error::NotAntiderivative("U' differs from u".into()));
    }
    let integral = path_integral(path, u, mode)?;
    let end = big_u.ss_eval(&[path.end()], &[])?;
    let start = big_u.ss_eval(&[path.start()], &[])?;
    let level = integral.level().max(end.level()).max(start.level());
    Ok(&(&integral.lift(level) - &end.lift(level)) + &start.lift(level))
}

/// Polynomial m-path `t ↦ (γ_1(t), …, γ_m(t))` on a box.
#[derive(Clone, Debug)]
pub struct MPath<S: Scalar> {
    pub domain: BodyBox<S>,
    comps: Vec<SuperPoly<S>>,
}

impl<S: Scalar> MPath<S> {
    pub fn new(domain: BodyBox<S>, comps: Vec<SuperPoly<S>>) -> Result<Self> {
        let m = domain.dim();
        if comps.len() != m || comps.iter().any(|c| c.nvars() != m) {
            return Err(Error::DimensionMismatch(format!(
                "m-path needs {m} components in {m} variables"
            )));
        }
        if comps
            .iter()
            .any(|c| !c.is_zero() && c.parity() != Parity::Even)
        {
            return Err(Error::ParityViolation(
                "m-path components must be even".into(),
            ));
        }
        let level = comps.iter().map(|c| c.level()).max().unwrap_or(0);
        let comps = comps.into_iter().map(|c| c.lift(level)).collect();
        Ok(MPath { domain, comps })
    }

    /// `t ↦ t` on the box.
    pub fn identity(domain: BodyBox<S>) -> Self {
        let m = domain.dim();
        let comps = (0..m).map(|j| SuperPoly::var(j, m, 0)).collect();
        MPath { domain, comps }
    }

    pub fn components(&self) -> &[SuperPoly<S>] {
        &self.comps
    }

    pub fn level(&self) -> u32 {
        self.comps.first().map(|c| c.level()).unwrap_or(0)
    }

    /// `det(∂γ_i/∂t_j)` as a polynomial.
    pub fn jacobian_det(&self) -> Result<SuperPoly<S>> {
        let m = self.comps.len();
        let proto = SuperPoly::zero(m, self.level());
        let rows = (0..m)
            .map(|i| (0..m).map(|j| self.comps[i].derivative(j)).collect())
            .collect();
        Mat::from_rows(rows, &proto)?.even_det()
    }

    /// `φ∘γ` for a polynomial map with no odd variables.
    pub fn mapped(&self, phi: &SuperMap<S>) -> Result<Self> {
        let m = self.comps.len();
        if phi.source_dims() != (m, 0) || phi.target_dims().1 != 0 {
            return Err(Error::DimensionMismatch(
                "m-path maps need an m|0 -> m'|0 map".into(),
            ));
        }
        let level = self.level().max(phi.level());
        let args: Vec<SuperPoly<S>> = self.comps.iter().map(|c| c.lift(level)).collect();
        let proto = SuperPoly::zero(m, level);
        let comps = phi
            .even()
            .iter()
            .map(|f| {
                Ok(f.coeff_poly(crate::algebra::IndexSet::EMPTY)?
                    .lift(level)
                    .eval_ring(&args, &proto))
            })
            .collect::<Result<Vec<_>>>()?;
        MPath::new(self.domain.clone(), comps)
    }
}

/// `∫_{I^m} dt det J(γ)(t) u(γ(t))`.
pub fn mpath_integral<S: Scalar>(
    path: &MPath<S>,
    u: &SupersmoothFn<S>,
    mode: &IntegrationMode,
) -> Result<Grassmann<S>> {
    let m = path.comps.len();
    if u.m() != m || u.n() != 0 {
        return Err(Error::DimensionMismatch(format!(
            "integrand must be a function of {m} even variables"
        )));
    }
    let det = path.jacobian_det()?;
    let bounds = path.domain.bounds();
    match mode {
        IntegrationMode::Exact => {
            let level = path.level().max(u.level());
            let args: Vec<SuperPoly<S>> = path.comps.iter().map(|c| c.lift(level)).collect();
            let along = u
                .coeff_poly(crate::algebra::IndexSet::EMPTY)?
                .lift(level)
                .eval_ring(&args, &SuperPoly::zero(m, level));
            Ok(det.lift(level).mul(&along).integrate_box(&bounds))
        }
        IntegrationMode::Quadrature(spec) => Ok(integrate_box(&bounds, spec, |t: &[S]| {
            let x: Vec<Grassmann<S>> = path.comps.iter().map(|c| c.eval_real(t)).collect();
            let v = u.ss_eval(&x, &[])?;
            let w = det.eval_real(t);
            let level = v.level().max(w.level());
            Ok(&w.lift(level) * &v.lift(level))
        })?
        .value),
    }
}

/// The 1-form `dx ρ(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Form1<S: Scalar> {
    pub rho: SupersmoothFn<S>,
}

impl<S: Scalar> Form1<S> {
    pub fn new(rho: SupersmoothFn<S>) -> Result<Self> {
        if rho.m() != 1 || rho.n() != 0 {
            return Err(Error::DimensionMismatch(
                "1-form coefficient must be a 1|0 function".into(),
            ));
        }
        Ok(Form1 { rho })
    }

    /// `∫_γ dx ρ(x) u(x)`.
    pub fn integrate(
        &self,
        path: &Path<S>,
        u: &SupersmoothFn<S>,
        mode: &IntegrationMode,
    ) -> Result<Grassmann<S>> {
        path_integral(path, &self.rho.mul(u)?, mode)
    }
}

/// `(φ*𝔳)_y = dy φ'(y) ρ(φ(y))`; `dom` is where `φ` must be invertible.
pub fn pullback_form1<S: Scalar>(
    phi: &SuperMap<S>,
    v: &Form1<S>,
    dom: &BodyBox<S>,
) -> Result<Form1<S>> {
    if phi.source_dims() != (1, 0) || phi.target_dims() != (1, 0) {
        return Err(Error::DimensionMismatch(
            "1-form pull-back needs a 1|0 -> 1|0 map".into(),
        ));
    }
    let check = is_superdiffeo(phi, &SuperDomain::new(dom.clone(), 0), 33)?;
    if let Some((at, why)) = check.witness {
        return Err(Error::NotSuperdiffeo(format!("{why} at {at:?}")));
    }
    let dphi = phi.even()[0].d_even(1)?;
    Form1::new(dphi.mul(&compose(&v.rho, phi)?)?)
}

/// `φ∘γ` for a polynomial `1|0 → 1|0` map and a polynomial path.
pub fn map_path<S: Scalar>(phi: &SuperMap<S>, path: &Path<S>) -> Result<Path<S>> {
    if phi.source_dims() != (1, 0) || phi.target_dims() != (1, 0) {
        return Err(Error::DimensionMismatch(
            "path maps need a 1|0 -> 1|0 map".into(),
        ));
    }
    let f = phi.even()[0].coeff_poly(crate::algebra::IndexSet::EMPTY)?;
    let mut segments = Vec::with_capacity(path.segments.len());
    for seg in &path.segments {
        let Shape::Poly(p) = &seg.shape else {
            return Err(Error::NotPolynomial("mapping a callback path".into()));
        };
        let level = p.level().max(f.level());
        let g = f
            .lift(level)
            .eval_ring(&[p.lift(level)], &SuperPoly::zero(1, level));
        segments.push(Segment {
            a: seg.a.clone(),
            b: seg.b.clone(),
            shape: Shape::Poly(g),
        });
    }
    Ok(Path { segments })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Q;

    fn g(text: &str, level: u32) -> Grassmann<Q> {
        Grassmann::parse(text, level).unwrap()
    }

    fn x_fn(level: u32) -> SupersmoothFn<Q> {
        SupersmoothFn::even_var(1, 1, 0, level).unwrap()
    }

    #[test]
    fn straight_path_to_nilpotent_endpoint() {
        let path = Path::straight(&Grassmann::zero(2), &g("1 + s[1,2]", 2)).unwrap();
        let v = path_integral(&path, &x_fn(2), &IntegrationMode::Exact).unwrap();
        assert_eq!(v, g("1/2 + s[1,2]", 2));
    }

    #[test]
    fn shifted_endpoints() {
        // [a+ν, b+ν] with a=1, b=3: (b²−a²)/2 + ν(b−a)
        let path = Path::straight(&g("1 + s[1,2]", 2), &g("3 + s[1,2]", 2)).unwrap();
        let v = path_integral(&path, &x_fn(2), &IntegrationMode::Exact).unwrap();
        assert_eq!(v, g("4 + 2*s[1,2]", 2));
    }

    #[test]
    fn sum_and_inverse() {
        let path = Path::straight(&g("s[1,2]", 2), &g("2", 2)).unwrap();
        let back = path_inverse(&path);
        let loop_ = path_sum(&path, &back).unwrap();
        let u = x_fn(2).mul(&x_fn(2)).unwrap();
        assert!(path_integral(&loop_, &u, &IntegrationMode::Exact)
            .unwrap()
            .is_zero());
        let fwd = path_integral(&path, &u, &IntegrationMode::Exact).unwrap();
        assert_eq!(
            path_integral(&back, &u, &IntegrationMode::Exact).unwrap(),
            -fwd
        );
        assert!(matches!(
            path_sum(&path, &path),
            Err(Error::EndpointMismatch(_))
        ));
    }

    #[test]
    fn quadratic_reparametrization() {
        let path = Path::straight(&g("0", 2), &g("1 + s[1,2]", 2)).unwrap();
        let phi = SuperPoly::univariate(
            &[
                Q::from_integer(0.into()),
                Q::from_integer(0.into()),
                Q::from_integer(1.into()),
            ],
            0,
        );
        let re = path_reparametrize(
            &path,
            &phi,
            Q::from_integer(0.into()),
            Q::from_integer(1.into()),
        )
        .unwrap();
        let a = path_integral(&path, &x_fn(2), &IntegrationMode::Exact).unwrap();
        let b = path_integral(&re, &x_fn(2), &IntegrationMode::Exact).unwrap();
        assert_eq!(a, b);
        let bad = SuperPoly::univariate(
            &[Q::from_integer(1.into()), Q::from_integer((-1).into())],
            0,
        );
        assert!(path_reparametrize(
            &path,
            &bad,
            Q::from_integer(0.into()),
            Q::from_integer(1.into())
        )
        .is_err());
    }

    #[test]
    fn unit_square_mpath() {
        let path = MPath::<Q>::identity(BodyBox::unit(2));
        let u = SupersmoothFn::from_poly(0, SuperPoly::var(0, 2, 0).mul(&SuperPoly::var(1, 2, 0)));
        let v = mpath_integral(&path, &u, &IntegrationMode::Exact).unwrap();
        assert_eq!(v, Grassmann::scalar(Q::new(1.into(), 4.into()), 0));
    }
}
