//! Berezin integration over odd variables and the naive even×odd integral.
//!
//! Conventions: `∫dθ v = (∂_{θ_n} ⋯ ∂_{θ_1} v)(0) = v_{1̄}` with coefficients
//! to the right of `θ^a`. Partial integrals apply the lowest axis first.

use std::collections::BTreeMap;
use std::fmt;

use crate::algebra::{Grassmann, IndexSet, Parity, MAX_LEVEL};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_box, IntegrationMode, QuadratureSpec};
use crate::ring::SuperRing;
use crate::scalar::Scalar;
use crate::supermatrix::Mat;
use crate::supersmooth::{compose, CoeffFn, SuperDomain, SuperMap, SupersmoothFn};

/// `v(θ) = Σ_a θ^a v_a` with Grassmann constants `v_a` at level `L`.
#[derive(Clone, PartialEq)]
pub struct OddPoly<S: Scalar> {
    n: usize,
    level: u32,
    coeffs: BTreeMap<IndexSet, Grassmann<S>>,
}

impl<S: Scalar> OddPoly<S> {
    pub fn zero(n: usize, level: u32) -> Self {
        OddPoly {
            n,
            level,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn from_coeffs<I>(n: usize, level: u32, coeffs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (IndexSet, Grassmann<S>)>,
    {
        if level + n as u32 > MAX_LEVEL {
            return Err(Error::LevelExceeded {
                needed: level + n as u32,
                max: MAX_LEVEL,
            });
        }
        let mut out = Self::zero(n, level);
        for (a, c) in coeffs {
            if a.max_index() as usize > n {
                return Err(Error::AxisOutOfRange {
                    axis: a.max_index() as usize,
                    max: n,
                });
            }
            let c = c.with_level(level)?;
            let sum = match out.coeffs.remove(&a) {
                Some(prev) => &prev + &c,
                None => c,
            };
            if !sum.is_zero() {
                out.coeffs.insert(a, sum);
            }
        }
        Ok(out)
    }

    /// `θ^a` with unit coefficient.
    pub fn monomial(a: IndexSet, n: usize, level: u32) -> Result<Self> {
        Self::from_coeffs(n, level, [(a, Grassmann::one(level))])
    }

    pub fn constant(c: Grassmann<S>, n: usize) -> Self {
        let level = c.level();
        Self::from_coeffs(n, level, [(IndexSet::EMPTY, c)]).expect("constant term")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn coeff(&self, a: IndexSet) -> Grassmann<S> {
        self.coeffs
            .get(&a)
            .cloned()
            .unwrap_or_else(|| Grassmann::zero(self.level))
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (IndexSet, &Grassmann<S>)> + '_ {
        self.coeffs.iter().map(|(a, c)| (*a, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn parity(&self) -> Parity {
        let mut acc = None;
        for (a, c) in &self.coeffs {
            acc = Parity::join(acc, Parity::of_degree(a.len()).product(c.parity()));
        }
        acc.unwrap_or(Parity::Even)
    }

    pub fn with_level(&self, level: u32) -> Result<Self> {
        Self::from_coeffs(
            self.n,
            level,
            self.coeffs.iter().map(|(a, c)| (*a, c.clone())),
        )
    }

    /// Single Grassmann element at level `L + n`; `θ_k ↦ σ_{L+k}`.
    pub fn to_expanded(&self) -> Grassmann<S> {
        let total = self.level + self.n as u32;
        let mut out = Grassmann::zero(total);
        for (a, c) in &self.coeffs {
            out = &out
                + &(&Grassmann::monomial(a.shifted(self.level), S::one(), total) * &c.lift(total));
        }
        out
    }

    pub fn from_expanded(g: &Grassmann<S>, n: usize, offset: u32) -> Result<Self> {
        let parts = g.split_block(offset, n as u32)?;
        Ok(OddPoly {
            n,
            level: offset,
            coeffs: parts.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        })
    }

    /// The odd generators `θ_1..θ_n` inside the expanded algebra.
    pub fn expanded_vars(n: usize, level: u32) -> Vec<Grassmann<S>> {
        (1..=n as u32)
            .map(|k| {
                Grassmann::monomial(IndexSet::singleton(level + k), S::one(), level + n as u32)
            })
            .collect()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_n(other)?;
        let level = self.level.max(other.level);
        let coeffs = self
            .coeffs
            .iter()
            .chain(&other.coeffs)
            .map(|(a, c)| (*a, c.lift(level)));
        Self::from_coeffs(self.n, level, coeffs.collect::<Vec<_>>())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        OddPoly {
            n: self.n,
            level: self.level,
            coeffs: self.coeffs.iter().map(|(a, c)| (*a, -c)).collect(),
        }
    }

    fn same_n(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "odd dimensions {} and {}",
                self.n, other.n
            )));
        }
        Ok(())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_n(other)?;
        let level = self.level.max(other.level);
        let a = self.with_level(level)?.to_expanded();
        let b = other.with_level(level)?.to_expanded();
        Self::from_expanded(&(&a * &b), self.n, level)
    }

    /// `λ · v` with the constant on the left.
    pub fn mul_left(&self, lambda: &Grassmann<S>) -> Result<Self> {
        let level = self.level.max(lambda.level());
        let e = self.with_level(level)?.to_expanded();
        Self::from_expanded(&(&lambda.lift(level + self.n as u32) * &e), self.n, level)
    }

    /// Evaluation at odd arguments `ω`.
    pub fn eval(&self, omega: &[Grassmann<S>]) -> Result<Grassmann<S>> {
        self.to_fn().ss_eval(&[], omega)
    }

    pub fn to_fn(&self) -> SupersmoothFn<S> {
        SupersmoothFn::from_coeffs(
            0,
            self.n,
            self.level,
            self.coeffs.iter().map(|(a, c)| {
                (
                    *a,
                    CoeffFn::Polynomial(crate::poly::SuperPoly::constant(c.clone(), 0)),
                )
            }),
        )
        .expect("valid odd polynomial")
    }

    pub fn from_fn(u: &SupersmoothFn<S>) -> Result<Self> {
        if u.m() != 0 {
            return Err(Error::DimensionMismatch(
                "odd polynomial needs m = 0".into(),
            ));
        }
        let mut coeffs = Vec::new();
        for (a, c) in u.coeffs() {
            let p = c
                .as_poly()
                .ok_or_else(|| Error::NotPolynomial("oracle coefficient".into()))?;
            coeffs.push((a, p.coeff(&[])));
        }
        Self::from_coeffs(u.n(), u.level(), coeffs)
    }

    /// Left derivative `∂/∂θ_k` (1-based).
    pub fn d_odd(&self, k: usize) -> Result<Self> {
        Self::from_fn(&self.to_fn().d_odd(k)?)
    }
}

impl<S: Scalar> fmt::Debug for OddPoly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "OddPoly(n={}, L={}: {})", self.n, self.level, self)
    }
}

impl<S: Scalar> fmt::Display for OddPoly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (i, (a, c)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if a.is_empty() {
                write!(f, "({c})")?;
            } else {
                write!(f, "th{a}*({c})")?;
            }
        }
        Ok(())
    }
}

/// `∫dθ v = v_{1̄}`.
pub fn berezin_full<S: Scalar>(v: &OddPoly<S>) -> Grassmann<S> {
    v.coeff(IndexSet::range(0, v.n as u32))
}

/// Integrates out the listed odd axes (1-based), lowest axis first.
pub fn berezin_partial<S: Scalar>(
    v: &SupersmoothFn<S>,
    axes: &[usize],
) -> Result<SupersmoothFn<S>> {
    let mut sorted = axes.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Precondition("repeated odd axis".into()));
    }
    let mut out = v.clone();
    for k in sorted {
        out = out.d_odd(k)?;
    }
    Ok(out)
}

fn check_odd_vector<S: Scalar>(rho: &[Grassmann<S>], n: usize) -> Result<()> {
    if rho.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "odd vector has {} entries, expected {n}",
            rho.len()
        )));
    }
    for (k, r) in rho.iter().enumerate() {
        if !r.is_zero() && r.parity() != Parity::Odd {
            return Err(Error::ParityViolation(format!(
                "entry {} is not odd",
                k + 1
            )));
        }
    }
    Ok(())
}

/// Substitutes `θ_k ↦ s_k` inside the expanded algebra, where `s_k` are
/// elements at level `level + n`.
fn substitute<S: Scalar>(v: &OddPoly<S>, subs: &[Grassmann<S>], level: u32) -> Grassmann<S> {
    let total = level + v.n as u32;
    let mut out = Grassmann::zero(total);
    for (a, c) in &v.coeffs {
        let mut mono = Grassmann::one(total);
        for k in a.iter() {
            mono = &mono * &subs[k as usize - 1];
        }
        out = &out + &(&mono * &c.lift(total));
    }
    out
}

/// `v(θ + ρ)`.
pub fn translate_odd<S: Scalar>(v: &OddPoly<S>, rho: &[Grassmann<S>]) -> Result<OddPoly<S>> {
    check_odd_vector(rho, v.n)?;
    let level = rho.iter().map(|r| r.level()).fold(v.level, u32::max);
    let total = level + v.n as u32;
    let vars = OddPoly::<S>::expanded_vars(v.n, level);
    let subs: Vec<Grassmann<S>> = vars
        .iter()
        .zip(rho)
        .map(|(t, r)| t + &r.lift(total))
        .collect();
    OddPoly::from_expanded(&substitute(v, &subs, level), v.n, level)
}

fn agree<S: Scalar>(a: &Grassmann<S>, b: &Grassmann<S>) -> Result<()> {
    let level = a.level().max(b.level());
    let diff = &a.lift(level) - &b.lift(level);
    let ok = if S::EXACT {
        diff.is_zero()
    } else {
        diff.max_abs() <= 1e-9 * (1.0 + a.max_abs().max(b.max_abs()))
    };
    if ok {
        Ok(())
    } else {
        Err(Error::FormulaDisagreement {
            residual: diff.max_abs(),
        })
    }
}

/// `(det A)⁻¹ ∫dω v(A·ω)`, checked against `∫dθ v`.
pub fn odd_linear_change<S: Scalar>(v: &OddPoly<S>, a: &Mat<Grassmann<S>>) -> Result<Grassmann<S>> {
    let n = v.n;
    if a.rows() != n || a.cols() != n {
        return Err(Error::DimensionMismatch(format!("matrix must be {n}x{n}")));
    }
    if a.parity().is_some_and(|p| p != Parity::Even) {
        return Err(Error::ParityViolation(
            "linear change needs even entries".into(),
        ));
    }
    let level = a
        .entries()
        .map(|(_, _, x)| x.level())
        .fold(v.level, u32::max);
    let total = level + n as u32;
    let omega = OddPoly::<S>::expanded_vars(n, level);
    let subs: Vec<Grassmann<S>> = (0..n)
        .map(|k| {
            (0..n).fold(Grassmann::zero(total), |acc, l| {
                &acc + &(&a.get(k, l).lift(total) * &omega[l])
            })
        })
        .collect();
    let changed = OddPoly::from_expanded(&substitute(v, &subs, level), n, level)?;
    let det = a.map(|x| x.lift(level)).even_det()?;
    let inv = det
        .even_inverse()
        .map_err(|_| Error::SingularBody("det A has zero body".into()))?;
    let value = &inv * &berezin_full(&changed);
    agree(&value, &berezin_full(v))?;
    Ok(value)
}

/// `∫dω (det ∂θ/∂ω)⁻¹ v(θ(ω))`, checked against `∫dθ v`.
pub fn odd_cov<S: Scalar>(v: &OddPoly<S>, theta_of_omega: &SuperMap<S>) -> Result<Grassmann<S>> {
    let n = v.n;
    if theta_of_omega.source_dims() != (0, n) || theta_of_omega.target_dims() != (0, n) {
        return Err(Error::DimensionMismatch(format!(
            "odd change of variables must be 0|{n} -> 0|{n}"
        )));
    }
    for (k, c) in theta_of_omega.odd().iter().enumerate() {
        let at_zero = c.coeff_poly(IndexSet::EMPTY)?;
        if !at_zero.is_zero() {
            return Err(Error::Precondition(format!("theta_{}(0) != 0", k + 1)));
        }
    }
    let level = theta_of_omega.level().max(v.level);
    let phi = theta_of_omega.with_level(level)?;
    let jac = phi.jacobian_expanded()?;
    let det = jac.b.even_det()?;
    if det.constant_body().is_none_or(|b| b.is_zero()) {
        return Err(Error::SingularBody(
            "det dtheta/domega has zero body at 0".into(),
        ));
    }
    let inv = det.try_inverse()?;
    let composed = compose(&v.with_level(level)?.to_fn(), &phi)?;
    let integrand = SupersmoothFn::from_expanded(&inv.mul(&composed.to_expanded()?), n, level)?;
    let value = berezin_full(&OddPoly::from_fn(&integrand)?);
    agree(&value, &berezin_full(v))?;
    Ok(value)
}

/// `δ(θ − ω) = (θ_1 − ω_1) ⋯ (θ_n − ω_n)`.
pub fn odd_delta<S: Scalar>(omega: &[Grassmann<S>], n: usize) -> Result<OddPoly<S>> {
    check_odd_vector(omega, n)?;
    let level = omega.iter().map(|w| w.level()).max().unwrap_or(0);
    let total = level + n as u32;
    let vars = OddPoly::<S>::expanded_vars(n, level);
    let prod = vars
        .iter()
        .zip(omega)
        .fold(Grassmann::one(total), |acc, (t, w)| {
            &acc * &(t - &w.lift(total))
        });
    OddPoly::from_expanded(&prod, n, level)
}

/// `∫dθ v ∂_s w + (−1)^{p(v)} ∫dθ (∂_s v) w`, which vanishes.
pub fn integration_by_parts_check<S: Scalar>(
    v: &OddPoly<S>,
    w: &OddPoly<S>,
    s: usize,
) -> Result<Grassmann<S>> {
    let pv = match v.parity() {
        Parity::Even => 0,
        Parity::Odd => 1,
        Parity::Mixed => return Err(Error::ParityViolation("v must be homogeneous".into())),
    };
    let lhs = berezin_full(&v.mul(&w.d_odd(s)?)?);
    let rhs = berezin_full(&v.d_odd(s)?.mul(w)?);
    let level = lhs.level().max(rhs.level());
    Ok(if pv == 0 {
        &lhs.lift(level) + &rhs.lift(level)
    } else {
        &lhs.lift(level) - &rhs.lift(level)
    })
}

fn integrate_coeff<S: Scalar>(
    c: Option<&CoeffFn<S>>,
    dom: &SuperDomain<S>,
    level: u32,
    mode: &IntegrationMode,
) -> Result<Grassmann<S>> {
    let bounds = dom.body.bounds();
    match c {
        None => Ok(Grassmann::zero(level)),
        Some(CoeffFn::Polynomial(p)) if *mode == IntegrationMode::Exact || S::EXACT => {
            Ok(p.integrate_box(&bounds))
        }
        Some(c) => {
            let spec = match mode {
                IntegrationMode::Quadrature(q) => *q,
                IntegrationMode::Exact => {
                    return Err(Error::NotPolynomial(
                        "exact integration of an oracle coefficient".into(),
                    ))
                }
            };
            Ok(integrate_box(&bounds, &spec, |x: &[S]| Ok(c.eval_real(x)))?.value)
        }
    }
}

/// `∫_U dq u_{1̄}(q)`.
pub fn naive_integral<S: Scalar>(
    u: &SupersmoothFn<S>,
    dom: &SuperDomain<S>,
    mode: &IntegrationMode,
) -> Result<Grassmann<S>> {
    if dom.body.dim() != u.m() || dom.n != u.n() {
        return Err(Error::DimensionMismatch(
            "domain does not match function dimensions".into(),
        ));
    }
    integrate_coeff(u.top_coeff(), dom, u.level(), mode)
}

/// `∫dx∫dθ u − ∫dθ∫dx u`.
pub fn fubini_check<S: Scalar>(
    u: &SupersmoothFn<S>,
    dom: &SuperDomain<S>,
    mode: &IntegrationMode,
) -> Result<Grassmann<S>> {
    let even_first = naive_integral(u, dom, mode)?;
    let mut integrated = Vec::new();
    for (a, c) in u.coeffs() {
        integrated.push((a, integrate_coeff(Some(c), dom, u.level(), mode)?));
    }
    let odd_last = berezin_full(&OddPoly::from_coeffs(u.n(), u.level(), integrated)?);
    Ok(&even_first - &odd_last)
}

/// Default quadrature used by callers that do not choose one.
pub fn default_mode<S: Scalar>() -> IntegrationMode {
    if S::EXACT {
        IntegrationMode::Exact
    } else {
        IntegrationMode::Quadrature(QuadratureSpec::default())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::SuperPoly;
    use crate::supersmooth::BodyBox;
    use crate::Q;

    fn g(text: &str, level: u32) -> Grassmann<Q> {
        Grassmann::parse(text, level).unwrap()
    }

    #[test]
    fn top_monomial_integrates_to_one() {
        for n in 0..5 {
            let full = IndexSet::range(0, n);
            for a in IndexSet::all_subsets(n) {
                let v = OddPoly::<Q>::monomial(a, n as usize, 0).unwrap();
                let want = if a == full {
                    Grassmann::one(0)
                } else {
                    Grassmann::zero(0)
                };
                assert_eq!(berezin_full(&v), want);
            }
        }
    }

    #[test]
    fn partial_iteration() {
        let v = OddPoly::<Q>::monomial(IndexSet::range(0, 2), 2, 0)
            .unwrap()
            .to_fn();
        let inner = berezin_partial(&v, &[1]).unwrap();
        assert_eq!(inner, SupersmoothFn::odd_var(2, 0, 2, 0).unwrap());
        let outer = berezin_partial(&inner, &[2]).unwrap();
        assert_eq!(
            OddPoly::from_fn(&outer).unwrap().coeff(IndexSet::EMPTY),
            Grassmann::one(0)
        );
    }

    #[test]
    fn translation_example() {
        let v = OddPoly::<Q>::monomial(IndexSet::singleton(1), 1, 1).unwrap();
        let t = translate_odd(&v, &[g("s[1]", 1)]).unwrap();
        assert_eq!(t.coeff(IndexSet::EMPTY), g("s[1]", 1));
        assert_eq!(berezin_full(&t), Grassmann::one(1));
    }

    #[test]
    fn linear_change_scalar() {
        let v = OddPoly::<Q>::monomial(IndexSet::singleton(1), 1, 0).unwrap();
        let a = Mat::from_rows(vec![vec![Grassmann::from_i64(2, 0)]], &Grassmann::zero(0)).unwrap();
        assert_eq!(odd_linear_change(&v, &a).unwrap(), Grassmann::one(0));
    }

    #[test]
    fn delta_reproduces() {
        let omega = vec![g("s[1]", 2), g("s[2]", 2)];
        let delta = odd_delta(&omega, 2).unwrap();
        let v = OddPoly::<Q>::monomial(IndexSet::range(0, 2), 2, 2).unwrap();
        let lhs = berezin_full(&delta.mul(&v).unwrap());
        assert_eq!(lhs, v.eval(&omega).unwrap());
        assert_eq!(lhs, g("s[1,2]", 2));
    }

    #[test]
    fn by_parts_example() {
        let v = OddPoly::<Q>::monomial(IndexSet::singleton(1), 2, 0).unwrap();
        let w = OddPoly::<Q>::monomial(IndexSet::range(0, 2), 2, 0).unwrap();
        assert!(integration_by_parts_check(&v, &w, 1).unwrap().is_zero());
    }

    #[test]
    fn naive_integral_of_unit_top() {
        let q = SuperPoly::<Q>::var(0, 1, 0);
        let u = SupersmoothFn::from_polys(
            1,
            2,
            0,
            [
                (IndexSet::EMPTY, q),
                (IndexSet::range(0, 2), SuperPoly::one(1, 0)),
            ],
        )
        .unwrap();
        let dom = SuperDomain::new(BodyBox::unit(1), 2);
        assert_eq!(
            naive_integral(&u, &dom, &IntegrationMode::Exact).unwrap(),
            Grassmann::one(0)
        );
        assert!(fubini_check(&u, &dom, &IntegrationMode::Exact)
            .unwrap()
            .is_zero());
    }
}
