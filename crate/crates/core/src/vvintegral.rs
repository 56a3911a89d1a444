//! Integrals of superforms over foliated supermanifolds and the change of
//! variables machinery built on them.

use crate::algebra::{AlgebraError, Grassmann, IndexSet};
use crate::error::{Error, Result};
use crate::poly::SuperPoly;
use crate::quadrature::{integrate_box, IntegrationMode, QuadratureSpec};
use crate::scalar::Scalar;
use crate::supermatrix::{sdet, sm_inverse, sm_mul, EvenSuperMatrix, Mat};
use crate::supersmooth::{
    body_det, check_level, compose, is_superdiffeo, negligible, BodyBox, Composed, PointFn,
    PointMap, PulledBack, SuperDomain, SuperMap, SuperPoint, SupersmoothFn,
};

/// Body points per axis used for the pointwise body checks.
pub const BODY_SAMPLES: usize = 7;

/// `Ω × 𝔯_od^n`: the parameter space of a foliated manifold.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSet<S> {
    pub body: BodyBox<S>,
    pub n: usize,
}

impl<S: Scalar> ParameterSet<S> {
    pub fn new(body: BodyBox<S>, n: usize) -> Self {
        ParameterSet { body, n }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.body.dim(), self.n)
    }

    pub fn domain(&self) -> SuperDomain<S> {
        SuperDomain::new(self.body.clone(), self.n)
    }
}

/// A parameter set together with its parametrization `γ(q,ϑ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FoliatedManifold<S: Scalar> {
    pub params: ParameterSet<S>,
    pub gamma: SuperMap<S>,
}

impl<S: Scalar> FoliatedManifold<S> {
    pub fn new(params: ParameterSet<S>, gamma: SuperMap<S>) -> Result<Self> {
        if gamma.source_dims() != params.dims() {
            return Err(Error::DimensionMismatch(format!(
                "parametrization has source {:?}, parameter set is {:?}",
                gamma.source_dims(),
                params.dims()
            )));
        }
        if gamma.target_dims() != gamma.source_dims() {
            return Err(Error::DimensionMismatch(
                "parametrization must be square".into(),
            ));
        }
        Ok(FoliatedManifold { params, gamma })
    }

    /// The trivial manifold `γ = id`.
    pub fn flat(params: ParameterSet<S>, level: u32) -> Self {
        let (m, n) = params.dims();
        FoliatedManifold {
            params,
            gamma: SuperMap::identity(m, n, level),
        }
    }
}

/// A superform `u(x,θ)[dx|dθ]`, represented by its density.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperForm<S: Scalar> {
    pub density: SupersmoothFn<S>,
}

impl<S: Scalar> SuperForm<S> {
    pub fn new(density: SupersmoothFn<S>) -> Self {
        SuperForm { density }
    }
}

/// Two sides of an integral identity.
#[derive(Debug, Clone, PartialEq)]
pub struct CvfReport<S: Scalar> {
    pub law: &'static str,
    pub lhs: Grassmann<S>,
    pub rhs: Grassmann<S>,
    pub residual: Grassmann<S>,
}

impl<S: Scalar> CvfReport<S> {
    fn new(law: &'static str, lhs: Grassmann<S>, rhs: Grassmann<S>) -> Self {
        let level = lhs.level().max(rhs.level());
        let (lhs, rhs) = (lhs.lift(level), rhs.lift(level));
        let residual = &lhs - &rhs;
        CvfReport {
            law,
            lhs,
            rhs,
            residual,
        }
    }

    pub fn residual_abs(&self) -> f64 {
        self.residual.max_abs()
    }
}

fn full_block(n: usize) -> IndexSet {
    IndexSet::range(0, n as u32)
}

fn top_of<S: Scalar>(g: &Grassmann<S>, offset: u32, n: usize) -> Result<Grassmann<S>> {
    Ok(g.split_block(offset, n as u32)?
        .remove(&full_block(n))
        .unwrap_or_else(|| Grassmann::zero(offset)))
}

fn top_of_poly<S: Scalar>(p: &SuperPoly<S>, offset: u32, n: usize) -> Result<SuperPoly<S>> {
    Ok(p.split_block(offset, n as u32)?
        .remove(&full_block(n))
        .unwrap_or_else(|| SuperPoly::zero(p.nvars(), offset)))
}

fn close<S: Scalar>(a: &Grassmann<S>, b: &Grassmann<S>) -> bool {
    let level = a.level().max(b.level());
    let d = (&a.lift(level) - &b.lift(level)).max_abs();
    if S::EXACT {
        d == 0.0 && a.lift(level) == b.lift(level)
    } else {
        d <= 1e-9 * a.max_abs().max(b.max_abs()).max(1.0)
    }
}

fn to_f(q: &[impl Scalar]) -> Vec<f64> {
    q.iter().map(|v| v.to_f64()).collect()
}

/// Fails with `BodySingular` where a body block of the super-Jacobian degenerates.
pub fn check_body_nonsingular<S: Scalar>(
    map: &dyn PointMap<S>,
    body: &BodyBox<S>,
    samples: usize,
) -> Result<()> {
    let (_, n) = map.source_dims();
    for q in body.sample_grid(samples) {
        let j = map.jacobian_point(&SuperPoint::real(&q, n, None, map.level()))?;
        if negligible(&body_det(&j.a)?) || negligible(&body_det(&j.b)?) {
            return Err(Error::BodySingular { q: to_f(&q) });
        }
    }
    Ok(())
}

/// Symbolic `sdet J(φ)` as a function of the source variables.
pub fn sdet_fn<S: Scalar>(phi: &SuperMap<S>) -> Result<SupersmoothFn<S>> {
    let (_, n) = phi.source_dims();
    let ber = sdet(&phi.jacobian_expanded()?).map_err(|e| match e {
        Error::Algebra(AlgebraError::NonConstantBody) | Error::BothBodiesSingular => Error::Precondition(
            "exact superdeterminant needs a Jacobian block with constant body; use quadrature mode".into(),
        ),
        other => other,
    })?;
    SupersmoothFn::from_expanded(&ber, n, phi.level())
}

/// `∫_M u = ∫_Ω dq ∫dϑ sdet J(γ)·u∘γ`.
pub fn vv_integral<S: Scalar>(
    manifold: &FoliatedManifold<S>,
    u: &SupersmoothFn<S>,
    mode: &IntegrationMode,
) -> Result<Grassmann<S>> {
    if (u.m(), u.n()) != manifold.gamma.target_dims() {
        return Err(Error::DimensionMismatch(
            "density does not match the manifold".into(),
        ));
    }
    match mode {
        IntegrationMode::Exact => vv_exact(&manifold.gamma, u, &manifold.params),
        IntegrationMode::Quadrature(spec) => {
            let prepared = manifold.gamma.prepare()?;
            vv_pointwise(&prepared, u, &manifold.params, spec)
        }
    }
}

/// Exact VV integral of polynomial data. Both orders of integration are
/// carried out and must agree.
pub fn vv_exact<S: Scalar>(
    gamma: &SuperMap<S>,
    u: &SupersmoothFn<S>,
    params: &ParameterSet<S>,
) -> Result<Grassmann<S>> {
    let n = params.n;
    let level = gamma.level().max(u.level());
    check_level(level + n as u32)?;
    let gamma = gamma.with_level(level)?;
    check_body_nonsingular(&gamma.prepare()?, &params.body, BODY_SAMPLES)?;
    let ber = sdet_fn(&gamma)?.with_level(level)?;
    let pulled = compose(u, &gamma)?.with_level(level)?;
    let integrand = ber.mul(&pulled)?.to_expanded()?;
    let bounds = params.body.bounds();
    let odd_last = top_of_poly(&integrand, level, n)?.integrate_box(&bounds);
    let even_last = top_of(&integrand.integrate_box(&bounds), level, n)?;
    if odd_last != even_last {
        let residual = (&odd_last - &even_last).max_abs();
        if S::EXACT || residual > 1e-9 * odd_last.max_abs().max(1.0) {
            return Err(Error::OrderInterchange { residual });
        }
    }
    Ok(odd_last)
}

/// VV integral by quadrature: at each node the odd parameters are generic
/// generators placed above the data level and the top coefficient is read off.
pub fn vv_pointwise<S: Scalar>(
    gamma: &dyn PointMap<S>,
    u: &dyn PointFn<S>,
    params: &ParameterSet<S>,
    spec: &QuadratureSpec,
) -> Result<Grassmann<S>> {
    if gamma.source_dims() != params.dims() || gamma.target_dims() != u.dims() {
        return Err(Error::DimensionMismatch(
            "map, density and parameter set disagree".into(),
        ));
    }
    let n = params.n;
    let level = gamma.level().max(u.level());
    let total = level + n as u32;
    check_level(total)?;
    check_body_nonsingular(gamma, &params.body, BODY_SAMPLES)?;
    let r = integrate_box(&params.body.bounds(), spec, |q: &[S]| {
        let p = SuperPoint::real(q, n, Some(level), total);
        let ber = sdet(&gamma.jacobian_point(&p)?)?;
        let v = u.eval_point(&gamma.eval_point(&p)?)?;
        top_of(&(&ber.lift(total) * &v.lift(total)), level, n)
    })?;
    Ok(r.value)
}

/// `φ*v`: density `sdet J(φ)·ρ∘φ`, optionally certified on a domain.
pub fn pullback_superform<S: Scalar>(
    phi: &SuperMap<S>,
    v: &SuperForm<S>,
    dom: Option<&SuperDomain<S>>,
) -> Result<SuperForm<S>> {
    if let Some(dom) = dom {
        let cert = is_superdiffeo(phi, dom, BODY_SAMPLES)?;
        if !cert.ok {
            let (q, why) = cert.witness.unwrap_or_default();
            return Err(Error::NotSuperdiffeo(format!("{why} at {q:?}")));
        }
    }
    let density = sdet_fn(phi)?.mul(&compose(&v.density, phi)?)?;
    Ok(SuperForm::new(density))
}

/// `sdet J(δ)·(sdet J(φ))∘δ − sdet J(γ)` for `δ = φ⁻¹∘γ`.
pub fn sdet_chain_residual<S: Scalar>(
    phi: &SuperMap<S>,
    phi_inv: &SuperMap<S>,
    gamma: &SuperMap<S>,
) -> Result<SupersmoothFn<S>> {
    let delta = phi_inv.compose(gamma)?;
    let lhs = sdet_fn(&delta)?.mul(&compose(&sdet_fn(phi)?, &delta)?)?;
    lhs.sub(&sdet_fn(gamma)?)
}

/// Checks `φ∘φ⁻¹ = id` symbolically, or on sample points of `γ` for oracle data.
pub fn check_inverse<S: Scalar>(
    phi: &SuperMap<S>,
    phi_inv: &SuperMap<S>,
    manifold: &FoliatedManifold<S>,
) -> Result<()> {
    if phi.is_polynomial() && phi_inv.is_polynomial() {
        let round = phi.compose(phi_inv)?;
        let (m, n) = round.source_dims();
        let id = SuperMap::identity(m, n, round.level());
        let (a, ao) = round.expanded_components(round.level())?;
        let (b, bo) = id.expanded_components(round.level())?;
        for (k, (x, y)) in a.iter().chain(&ao).zip(b.iter().chain(&bo)).enumerate() {
            let d = x.sub(y);
            let bad = if S::EXACT {
                !d.is_zero()
            } else {
                d.max_abs() > 1e-9
            };
            if bad {
                return Err(Error::InverseMismatch(format!(
                    "component {} of φ∘φ⁻¹ differs from the identity",
                    k + 1
                )));
            }
        }
        return Ok(());
    }
    let n = manifold.params.n;
    let level = phi.level().max(phi_inv.level()).max(manifold.gamma.level());
    let total = level + n as u32;
    check_level(total)?;
    for q in manifold.params.body.sample_grid(BODY_SAMPLES) {
        let p = manifold
            .gamma
            .eval(&SuperPoint::real(&q, n, Some(level), total))?;
        let back = phi.eval(&phi_inv.eval(&p)?)?;
        for (x, y) in back
            .even
            .iter()
            .chain(&back.odd)
            .zip(p.even.iter().chain(&p.odd))
        {
            if !close(x, y) {
                return Err(Error::InverseMismatch(format!(
                    "φ(φ⁻¹(p)) ≠ p over q = {:?}",
                    to_f(&q)
                )));
            }
        }
    }
    Ok(())
}

/// `∫_M u` against `∫_{(Ω, φ⁻¹∘γ)} φ*u`.
pub fn cvf_residual<S: Scalar>(
    phi: &SuperMap<S>,
    phi_inv: &SuperMap<S>,
    manifold: &FoliatedManifold<S>,
    u: &SupersmoothFn<S>,
    mode: &IntegrationMode,
) -> Result<CvfReport<S>> {
    check_inverse(phi, phi_inv, manifold)?;
    let lhs = vv_integral(manifold, u, mode)?;
    let rhs = match mode {
        IntegrationMode::Exact => {
            let delta = phi_inv.compose(&manifold.gamma)?;
            let pulled = pullback_superform(phi, &SuperForm::new(u.clone()), None)?;
            vv_exact(&delta, &pulled.density, &manifold.params)?
        }
        IntegrationMode::Quadrature(spec) => {
            let (g, pi, p) = (
                manifold.gamma.prepare()?,
                phi_inv.prepare()?,
                phi.prepare()?,
            );
            let delta = Composed {
                outer: &pi,
                inner: &g,
            };
            let pulled = PulledBack {
                map: &p,
                density: u,
            };
            vv_pointwise(&delta, &pulled, &manifold.params, spec)?
        }
    };
    Ok(CvfReport::new(
        "int_M u = int_(Omega, phi^-1 o gamma) phi*u",
        lhs,
        rhs,
    ))
}

/// `∫_{(Ω,γ)} u` against `∫_{(Ω',γ∘φ)} u` for an orientation-preserving
/// reparametrization whose even part depends only on `q'`.
pub fn reparam_invariance_check<S: Scalar>(
    manifold: &FoliatedManifold<S>,
    phi: &SuperMap<S>,
    params_prime: &ParameterSet<S>,
    u: &SupersmoothFn<S>,
    mode: &IntegrationMode,
) -> Result<CvfReport<S>> {
    if phi.source_dims() != params_prime.dims() || phi.target_dims() != manifold.params.dims() {
        return Err(Error::DimensionMismatch(
            "reparametrization does not connect the parameter sets".into(),
        ));
    }
    for (j, c) in phi.even().iter().enumerate() {
        if c.coeffs().any(|(a, _)| !a.is_empty()) {
            return Err(Error::Precondition(format!(
                "even component {} of the reparametrization depends on ϑ'",
                j + 1
            )));
        }
    }
    let prepared = phi.prepare()?;
    let n = params_prime.n;
    for q in params_prime.body.sample_grid(BODY_SAMPLES) {
        let p = SuperPoint::real(&q, n, None, phi.level());
        let j = prepared.jacobian_point(&p)?;
        let da = body_det(&j.a)?;
        if da <= S::zero() {
            return Err(Error::Orientation {
                point: to_f(&q),
                det: da.to_f64(),
            });
        }
        if negligible(&body_det(&j.b)?) {
            return Err(Error::BodySingular { q: to_f(&q) });
        }
        let img = prepared.eval_point(&p)?.body();
        if !manifold.params.body.contains(&img) {
            return Err(Error::OutsideDomain { point: to_f(&img) });
        }
    }
    let lhs = vv_integral(manifold, u, mode)?;
    let rhs = match mode {
        IntegrationMode::Exact => vv_exact(&manifold.gamma.compose(phi)?, u, params_prime)?,
        IntegrationMode::Quadrature(spec) => {
            let g = manifold.gamma.prepare()?;
            let chained = Composed {
                outer: &g,
                inner: &prepared,
            };
            vv_pointwise(&chained, u, params_prime, spec)?
        }
    };
    Ok(CvfReport::new(
        "int_(Omega, gamma) u = int_(Omega', gamma o phi) u",
        lhs,
        rhs,
    ))
}

/// One elementary step of the linear change of variables.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearStep<S: Scalar> {
    pub name: &'static str,
    /// The step matrix `P_k` with `old = new·P_k`.
    pub matrix: EvenSuperMatrix<Grassmann<S>>,
    /// Expected `sdet P_k` in closed form.
    pub factor: Grassmann<S>,
    /// `sdet P_k − factor`.
    pub factor_residual: f64,
    /// Pulled-back density minus its closed form.
    pub form_residual: f64,
    /// `∫_{N_k} F_k`.
    pub integral: Grassmann<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearCvfReport<S: Scalar> {
    pub steps: Vec<LinearStep<S>>,
    /// `P_4P_3P_2P_1 − M⁻¹`.
    pub product_residual: f64,
    /// `Π factors − sdet M⁻¹`.
    pub factor_product_residual: f64,
    /// Largest spread of the step integrals `∫_{N_k} F_k`.
    pub chain_residual: f64,
    /// `∫ u∘M dq dϑ` against `sdet M⁻¹ ∫_{(Ω, (q,ϑ)M)} u`.
    pub cvf: CvfReport<S>,
    /// `∫ (u∘M)_{1̄} − sdet M⁻¹ ∫ u_{1̄}` over the same box: not an identity
    /// once the map mixes even and odd directions.
    pub naive_residual: Grassmann<S>,
}

impl<S: Scalar> LinearCvfReport<S> {
    pub fn max_residual(&self) -> f64 {
        self.steps
            .iter()
            .flat_map(|s| [s.factor_residual, s.form_residual])
            .chain([
                self.product_residual,
                self.factor_product_residual,
                self.chain_residual,
                self.cvf.residual_abs(),
            ])
            .fold(0.0, f64::max)
    }
}

fn block<S: Scalar>(
    a: Mat<Grassmann<S>>,
    c: Mat<Grassmann<S>>,
    d: Mat<Grassmann<S>>,
    b: Mat<Grassmann<S>>,
) -> Result<EvenSuperMatrix<Grassmann<S>>> {
    EvenSuperMatrix::new(a, c, d, b)
}

fn fn_diff<S: Scalar>(a: &SupersmoothFn<S>, b: &SupersmoothFn<S>) -> Result<f64> {
    let level = a.level().max(b.level());
    Ok(a.with_level(level)?
        .sub(&b.with_level(level)?)?
        .to_expanded()?
        .max_abs())
}

/// Factors a constant supermatrix into four elementary steps, pulls `u`
/// back through each one and checks every intermediate identity exactly.
pub fn linear_cvf_check<S: Scalar>(
    mat: &EvenSuperMatrix<Grassmann<S>>,
    u: &SupersmoothFn<S>,
    params: &ParameterSet<S>,
) -> Result<LinearCvfReport<S>> {
    let (m, n) = mat.dims();
    if params.dims() != (m, n) || (u.m(), u.n()) != (m, n) {
        return Err(Error::DimensionMismatch(
            "matrix, density and parameter set disagree".into(),
        ));
    }
    let level = mat.a.proto().level().max(u.level());
    let mat = mat.map(|e| e.lift(level));
    let u = u.with_level(level)?;
    let g = Grassmann::<S>::zero(level);
    let (im, inn) = (Mat::identity(m, &g), Mat::identity(n, &g));
    let (zmn, znm) = (Mat::zeros(m, n, &g), Mat::zeros(n, m, &g));
    let a_inv = mat.a.even_inverse()?;
    let b_inv = mat.b.even_inverse()?;
    let ac = a_inv.mul(&mat.c)?;
    let bd = b_inv.mul(&mat.d)?;
    let k = im.sub(&ac.mul(&bd)?)?;
    let k_inv = k.even_inverse()?;
    let f1 = &mat.a.even_det()?.even_inverse()? * &mat.b.even_det()?;
    let f3 = k.even_det()?.even_inverse()?;
    let one = Grassmann::one(level);

    let ps = [
        (
            "diagonal",
            block(a_inv.clone(), zmn.clone(), znm.clone(), b_inv.clone())?,
            f1.clone(),
        ),
        (
            "upper shear",
            block(im.clone(), ac.neg(), znm.clone(), inn.clone())?,
            one.clone(),
        ),
        (
            "even rescale",
            block(k_inv, zmn.clone(), znm.clone(), inn.clone())?,
            f3.clone(),
        ),
        (
            "lower shear",
            block(im.clone(), zmn.clone(), bd.neg(), inn.clone())?,
            one.clone(),
        ),
    ];
    // closed forms F_k = c_k·u((y,ω)Q_k)
    let f13 = &f1 * &f3;
    let closed = [
        (
            f1.clone(),
            block(im.clone(), ac.clone(), bd.clone(), inn.clone())?,
        ),
        (
            f1.clone(),
            block(k.clone(), zmn.clone(), bd.clone(), inn.clone())?,
        ),
        (
            f13.clone(),
            block(im.clone(), zmn.clone(), bd.clone(), inn.clone())?,
        ),
        (f13.clone(), EvenSuperMatrix::identity(m, n, &g)),
    ];

    let mut current = compose(&u, &SuperMap::linear(&mat)?)?;
    let mut frame = EvenSuperMatrix::identity(m, n, &g);
    let v0 = vv_exact(&SuperMap::linear(&frame)?, &current, params)?;
    let mut integrals = vec![v0.clone()];
    let mut steps = Vec::with_capacity(4);
    let mut prod = EvenSuperMatrix::identity(m, n, &g);
    let mut factor_prod = one.clone();
    for ((name, p, factor), (c, q)) in ps.into_iter().zip(closed) {
        let s = sdet(&p)?;
        let factor_residual = (&s - &factor).max_abs();
        current = compose(&current, &SuperMap::linear(&p)?)?.mul_const_left(&s)?;
        let expected = compose(&u, &SuperMap::linear(&q)?)?.mul_const_left(&c)?;
        let form_residual = fn_diff(&current, &expected)?;
        frame = sm_mul(&frame, &sm_inverse(&p)?)?;
        let integral = vv_exact(&SuperMap::linear(&frame)?, &current, params)?;
        integrals.push(integral.clone());
        prod = sm_mul(&p, &prod)?;
        factor_prod = &factor_prod * &factor;
        steps.push(LinearStep {
            name,
            matrix: p,
            factor,
            factor_residual,
            form_residual,
            integral,
        });
    }
    let product_residual = prod.to_full().sub(&sm_inverse(&mat)?.to_full())?.max_abs();
    let sdet_m = sdet(&mat)?;
    let sdet_inv = sdet_m.even_inverse()?;
    let factor_product_residual = (&factor_prod - &sdet_inv).max_abs();
    let chain_residual = integrals
        .iter()
        .map(|v| (v - &v0).max_abs())
        .fold(0.0, f64::max);

    let on_image = vv_exact(&SuperMap::linear(&mat)?, &u, params)?;
    let cvf = CvfReport::new(
        "int (u o M) dq dtheta = sdet(M)^-1 int_(Omega, M) u",
        v0.clone(),
        &sdet_inv * &on_image,
    );
    let naive_u = top_of_poly(&u.to_expanded()?, level, n)?.integrate_box(&params.body.bounds());
    let naive_residual = &v0 - &(&sdet_inv * &naive_u);
    Ok(LinearCvfReport {
        steps,
        product_residual,
        factor_product_residual,
        chain_residual,
        cvf,
        naive_residual,
    })
}

/// Witness for `top(Ber·u∘H) − det(Dh₀)·u_{1̄}(h₀) = Σ_j ∂_j G_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition<S: Scalar> {
    /// `top(Ber H · u∘H)`.
    pub pulled_top: SuperPoly<S>,
    /// `det(Dh₀)·u_{1̄}(h₀)`.
    pub body_term: SuperPoly<S>,
    /// The vector field `G`.
    pub field: Vec<SuperPoly<S>>,
    /// `pulled_top − body_term − div G`.
    pub residual: SuperPoly<S>,
}

/// Homotopy construction of `G` for a map `H = (h(y,ω), ω)`: with
/// `h_t = h₀ + t(h − h₀)`, `G_j = Σ_a top(ω^a ∫₀¹ u_a(h_t)·det(J_t | col j ← h − h₀) dt)`.
pub fn total_derivative_decomposition<S: Scalar>(
    h_map: &SuperMap<S>,
    u: &SupersmoothFn<S>,
) -> Result<Decomposition<S>> {
    let (m, n) = h_map.source_dims();
    if h_map.target_dims() != (m, n) || (u.m(), u.n()) != (m, n) {
        return Err(Error::DimensionMismatch(
            "decomposition needs a square map matching u".into(),
        ));
    }
    let level = h_map.level().max(u.level());
    let total = level + n as u32;
    check_level(total)?;
    let h_map = h_map.with_level(level)?;
    for (k, c) in h_map.odd().iter().enumerate() {
        if *c != SupersmoothFn::odd_var(k + 1, m, n, level)? {
            return Err(Error::Shape(format!(
                "odd component {} must be ω_{}",
                k + 1,
                k + 1
            )));
        }
    }
    let u = u.with_level(level)?;
    let (hs, _) = h_map.expanded_components(level)?;
    let h0: Vec<SuperPoly<S>> = hs
        .iter()
        .map(|h| {
            Ok(h.split_block(level, n as u32)?
                .remove(&IndexSet::EMPTY)
                .unwrap_or_else(|| SuperPoly::zero(m, level)))
        })
        .collect::<Result<_>>()?;
    let jac = |hs: &[SuperPoly<S>], vars: usize, lvl: u32| -> Result<Mat<SuperPoly<S>>> {
        let proto = SuperPoly::zero(vars, lvl);
        Mat::from_rows(
            (0..m)
                .map(|k| (0..m).map(|i| hs[k].derivative(i)).collect())
                .collect(),
            &proto,
        )
    };
    let ber = jac(&hs, m, total)?.even_det()?;
    let composed = compose(&u, &h_map)?.to_expanded()?;
    let pulled_top = top_of_poly(&ber.mul(&composed), level, n)?;

    let proto0 = SuperPoly::zero(m, level);
    let top_coeff = u.coeff_poly(full_block(n))?;
    let body_term = jac(&h0, m, level)?
        .even_det()?
        .mul(&top_coeff.eval_ring(&h0, &proto0));

    // homotopy in m+1 variables, t last
    let t = SuperPoly::var(m, m + 1, total);
    let h0_lift: Vec<SuperPoly<S>> = h0.iter().map(|p| p.lift(total).extend_vars(1)).collect();
    let s: Vec<SuperPoly<S>> = hs
        .iter()
        .zip(&h0_lift)
        .map(|(h, z)| h.extend_vars(1).sub(z))
        .collect();
    let ht: Vec<SuperPoly<S>> = h0_lift
        .iter()
        .zip(&s)
        .map(|(z, d)| z.add(&t.mul(d)))
        .collect();
    let jt = jac(&ht, m + 1, total)?;
    let proto_t = SuperPoly::zero(m + 1, total);
    let (zero, one) = (S::zero(), S::one());
    let mut field = Vec::with_capacity(m);
    for j in 0..m {
        let mut replaced = jt.clone();
        for (k, sk) in s.iter().enumerate() {
            replaced.set(k, j, sk.clone());
        }
        let det = replaced.even_det()?;
        let mut g_j = SuperPoly::zero(m, level);
        for (a, c) in u.coeffs() {
            let ua = c.as_poly().ok_or_else(|| {
                Error::NotPolynomial("decomposition needs polynomial data".into())
            })?;
            let inner = ua
                .lift(total)
                .eval_ring(&ht, &proto_t)
                .mul(&det)
                .integrate_var(m, &zero, &one);
            let omega = Grassmann::monomial(a.shifted(level), S::one(), total);
            g_j = g_j.add(&top_of_poly(&inner.mul_left(&omega), level, n)?);
        }
        field.push(g_j);
    }
    let div = field
        .iter()
        .enumerate()
        .fold(SuperPoly::zero(m, level), |acc, (j, g)| {
            acc.add(&g.derivative(j))
        });
    let residual = pulled_top.sub(&body_term).sub(&div);
    Ok(Decomposition {
        pulled_top,
        body_term,
        field,
        residual,
    })
}

/// Naive integrals of `u` and of its pull-back over the same body box.
#[derive(Debug, Clone, PartialEq)]
pub struct NaiveCvfReport<S: Scalar> {
    pub naive_lhs: Grassmann<S>,
    pub naive_rhs: Grassmann<S>,
    /// `naive_rhs − naive_lhs`.
    pub discrepancy: Grassmann<S>,
    /// Flux of the decomposition field through the faces of the box.
    pub boundary_term: Grassmann<S>,
    /// `∫ det(Dh₀)u_{1̄}(h₀) − ∫ u_{1̄}`.
    pub bulk_term: Grassmann<S>,
}

fn flux<S: Scalar>(field: &[SuperPoly<S>], body: &BodyBox<S>) -> Grassmann<S> {
    let bounds = body.bounds();
    let mut acc = Grassmann::zero(field.first().map(|g| g.level()).unwrap_or(0));
    for (j, g) in field.iter().enumerate() {
        let (lo, hi) = &bounds[j];
        let face = g.substitute(j, hi).sub(&g.substitute(j, lo));
        let mut b = bounds.clone();
        b[j] = (S::zero(), S::one());
        acc = &acc + &face.integrate_box(&b);
    }
    acc
}

/// For a map `(h(y,ω), ω)` the naive integrals differ by a boundary flux and
/// a body term. Both are computed independently and must sum to the discrepancy.
pub fn naive_cvf_discrepancy<S: Scalar>(
    phi: &SuperMap<S>,
    dom: &SuperDomain<S>,
    u: &SupersmoothFn<S>,
) -> Result<NaiveCvfReport<S>> {
    let dec = total_derivative_decomposition(phi, u)?;
    let exact = IntegrationMode::Exact;
    let naive_lhs = crate::berezin::naive_integral(u, dom, &exact)?;
    let pulled = pullback_superform(phi, &SuperForm::new(u.clone()), Some(dom))?;
    let naive_rhs = crate::berezin::naive_integral(&pulled.density, dom, &exact)?;
    let level = naive_lhs
        .level()
        .max(naive_rhs.level())
        .max(dec.body_term.level());
    let (naive_lhs, naive_rhs) = (naive_lhs.lift(level), naive_rhs.lift(level));
    let discrepancy = &naive_rhs - &naive_lhs;
    let bounds = dom.body.bounds();
    let boundary_term = flux(&dec.field, &dom.body).lift(level);
    let bulk_term = (&dec.body_term.integrate_box(&bounds) - &naive_lhs).lift(level);
    let expected = &boundary_term + &bulk_term;
    if !close(&discrepancy, &expected) {
        return Err(Error::FormulaDisagreement {
            residual: (&discrepancy - &expected).max_abs(),
        });
    }
    Ok(NaiveCvfReport {
        naive_lhs,
        naive_rhs,
        discrepancy,
        boundary_term,
        bulk_term,
    })
}

/// `(y + c·ω1ω2 f(y), ω1, ω2)` in `1|2` variables.
pub fn soul_shift<S: Scalar>(f: &SuperPoly<S>, c: S) -> Result<SuperMap<S>> {
    if f.nvars() != 1 {
        return Err(Error::DimensionMismatch(
            "shift profile must be univariate".into(),
        ));
    }
    let level = f.level();
    let y = SupersmoothFn::even_var(1, 1, 2, level)?;
    let shift = SupersmoothFn::from_polys(1, 2, level, [(IndexSet::range(0, 2), f.scale(&c))])?;
    let odd = (1..=2)
        .map(|k| SupersmoothFn::odd_var(k, 1, 2, level))
        .collect::<Result<_>>()?;
    SuperMap::new(1, 2, vec![y.add(&shift)?], odd)
}

/// Both comparisons for `φ = (y + ω1ω2 f(y), ω)` and `u = u_0 + θ1θ2 u_1`
/// on `(lo, hi)`: the naive one, which picks up `∫(f u_0)'`, and the VV one.
#[derive(Debug, Clone, PartialEq)]
pub struct Example1Report<S: Scalar> {
    pub naive: NaiveCvfReport<S>,
    pub vv: CvfReport<S>,
    /// `sdet J(φ)`, expected to be `1 + ω1ω2 f'`.
    pub sdet_phi: SupersmoothFn<S>,
}

pub fn example1<S: Scalar>(
    u0: &SuperPoly<S>,
    u1: &SuperPoly<S>,
    f: &SuperPoly<S>,
    lo: S,
    hi: S,
) -> Result<Example1Report<S>> {
    let level = u0.level().max(u1.level()).max(f.level());
    let u = SupersmoothFn::from_polys(
        1,
        2,
        level,
        [
            (IndexSet::EMPTY, u0.lift(level)),
            (IndexSet::range(0, 2), u1.lift(level)),
        ],
    )?;
    let f = f.lift(level);
    let phi = soul_shift(&f, S::one())?;
    let inv = soul_shift(&f, -S::one())?;
    let body = BodyBox::interval(lo, hi)?;
    let naive = naive_cvf_discrepancy(&phi, &SuperDomain::new(body.clone(), 2), &u)?;
    let manifold = FoliatedManifold::flat(ParameterSet::new(body, 2), level);
    let vv = cvf_residual(&phi, &inv, &manifold, &u, &IntegrationMode::Exact)?;
    Ok(Example1Report {
        naive,
        vv,
        sdet_phi: sdet_fn(&phi)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Q;

    fn qi(v: i64) -> Q {
        Q::from_integer(v.into())
    }

    fn qr(a: i64, b: i64) -> Q {
        Q::new(a.into(), b.into())
    }

    /// `(y + ω1ω2 p(y), ω)` for a polynomial `p`.
    fn soul_shift(p: &[Q]) -> SuperMap<Q> {
        let y = SupersmoothFn::even_var(1, 1, 2, 0).unwrap();
        let shift = SupersmoothFn::from_polys(
            1,
            2,
            0,
            [(IndexSet::range(0, 2), SuperPoly::univariate(p, 0))],
        )
        .unwrap();
        let w: Vec<_> = (1..=2)
            .map(|k| SupersmoothFn::odd_var(k, 1, 2, 0).unwrap())
            .collect();
        SuperMap::new(1, 2, vec![y.add(&shift).unwrap()], w).unwrap()
    }

    fn density(u0: &[Q], u1: &[Q]) -> SupersmoothFn<Q> {
        SupersmoothFn::from_polys(
            1,
            2,
            0,
            [
                (IndexSet::EMPTY, SuperPoly::univariate(u0, 0)),
                (IndexSet::range(0, 2), SuperPoly::univariate(u1, 0)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn flat_vv_integral_is_naive() {
        let params = ParameterSet::new(BodyBox::interval(qi(0), qi(1)).unwrap(), 2);
        let u = density(&[qi(5)], &[qi(0), qi(3)]);
        let v = vv_integral(
            &FoliatedManifold::flat(params, 0),
            &u,
            &IntegrationMode::Exact,
        )
        .unwrap();
        assert_eq!(v, Grassmann::scalar(qr(3, 2), 0));
    }

    #[test]
    fn soul_shift_pulls_back_with_derivative_term() {
        // sdet = 1 + ω1ω2 p', u∘φ = u0 + ω1ω2(p u0' + u1)
        let phi = soul_shift(&[qi(0), qi(1)]);
        let u = density(&[qi(1), qi(1)], &[qi(2)]);
        let pulled = pullback_superform(&phi, &SuperForm::new(u), None)
            .unwrap()
            .density;
        let top = pulled.coeff_poly(IndexSet::range(0, 2)).unwrap();
        // (p u0)' + u1 = (y + y²)' + 2 = 3 + 2y
        assert_eq!(top, SuperPoly::univariate(&[qi(3), qi(2)], 0));
    }

    #[test]
    fn decomposition_of_soul_shift_is_p_times_u0() {
        let phi = soul_shift(&[qi(1), qi(0), qi(1)]);
        let u = density(&[qi(2), qi(-1)], &[qi(0), qi(0), qi(4)]);
        let dec = total_derivative_decomposition(&phi, &u).unwrap();
        assert!(dec.residual.is_zero());
        let expect = SuperPoly::univariate(&[qi(1), qi(0), qi(1)], 0)
            .mul(&SuperPoly::univariate(&[qi(2), qi(-1)], 0));
        assert_eq!(dec.field[0], expect);
    }

    #[test]
    fn naive_discrepancy_is_a_boundary_term() {
        let phi = soul_shift(&[qi(0), qi(1)]);
        let u = density(&[qi(1), qi(1)], &[qi(0)]);
        let dom = SuperDomain::new(BodyBox::interval(qi(0), qi(1)).unwrap(), 2);
        let r = naive_cvf_discrepancy(&phi, &dom, &u).unwrap();
        // ∫ (y(1+y))' = 2
        assert_eq!(r.discrepancy, Grassmann::from_i64(2, 0));
        assert_eq!(r.boundary_term, Grassmann::from_i64(2, 0));
    }

    #[test]
    fn cvf_holds_for_soul_shift() {
        let phi = soul_shift(&[qi(0), qi(1)]);
        let inv = soul_shift(&[qi(0), qi(-1)]);
        let params = ParameterSet::new(BodyBox::interval(qi(0), qi(1)).unwrap(), 2);
        let u = density(&[qi(1), qi(1)], &[qi(0), qi(0), qi(1)]);
        let r = cvf_residual(
            &phi,
            &inv,
            &FoliatedManifold::flat(params, 0),
            &u,
            &IntegrationMode::Exact,
        )
        .unwrap();
        assert!(r.residual.is_zero(), "{:?}", r);
        assert!(
            sdet_chain_residual(&phi, &inv, &SuperMap::identity(1, 2, 0))
                .unwrap()
                .is_zero()
        );
    }

    #[test]
    fn wrong_inverse_is_rejected() {
        let phi = soul_shift(&[qi(0), qi(1)]);
        let params = ParameterSet::new(BodyBox::interval(qi(0), qi(1)).unwrap(), 2);
        let u = density(&[qi(1)], &[qi(1)]);
        let r = cvf_residual(
            &phi,
            &phi,
            &FoliatedManifold::flat(params, 0),
            &u,
            &IntegrationMode::Exact,
        );
        assert!(matches!(r, Err(Error::InverseMismatch(_))));
    }
}
