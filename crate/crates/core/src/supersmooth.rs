//! Supersmooth functions `u(x,θ) = Σ_a θ^a u_a(x)` and supersmooth maps.
//!
//! Odd multi-indices `a ∈ {0,1}^n` reuse [`IndexSet`] with labels `1..=n`.
//! Coefficients stand to the right of `θ^a`.
//!
//! For symbolic work a function is *expanded*: its odd variables become
//! dedicated generators `σ_{L+1}, …, σ_{L+n}` placed above the coefficient
//! level `L`, turning it into a single [`SuperPoly`] at level `L+n`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::algebra::{Grassmann, IndexSet, Parity, MAX_LEVEL};
use crate::error::{Error, Result};
use crate::poly::SuperPoly;
use crate::ring::SuperRing;
use crate::scalar::{inv_factorial, Scalar};
use crate::supermatrix::{sdet, EvenSuperMatrix, Mat};

/// Smooth real function of `m` variables with derivatives up to a declared order.
pub trait SmoothOracle<S>: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;
    fn max_order(&self) -> u32;
    /// `∂^α f(point)`.
    fn derivative(&self, point: &[S], alpha: &[u32]) -> S;
}

/// Built-in transcendental oracles acting on one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Elementary {
    Exp,
    Sin,
    Cos,
}

/// `f(x) = g(rate · x_axis)` for an [`Elementary`] `g`.
#[derive(Debug, Clone)]
pub struct ElementaryOracle {
    pub kind: Elementary,
    pub dim: usize,
    pub axis: usize,
    pub rate: f64,
    pub order: u32,
}

impl ElementaryOracle {
    pub fn new(kind: Elementary, dim: usize, axis: usize, rate: f64) -> Self {
        ElementaryOracle {
            kind,
            dim,
            axis,
            rate,
            order: 64,
        }
    }
}

impl<S: Scalar> SmoothOracle<S> for ElementaryOracle {
    fn dim(&self) -> usize {
        self.dim
    }

    fn max_order(&self) -> u32 {
        self.order
    }

    fn derivative(&self, point: &[S], alpha: &[u32]) -> S {
        if alpha
            .iter()
            .enumerate()
            .any(|(j, &k)| j != self.axis && k > 0)
        {
            return S::zero();
        }
        let k = alpha[self.axis] as i32;
        let x = point[self.axis].to_f64() * self.rate;
        let factor = self.rate.powi(k);
        let shift = std::f64::consts::FRAC_PI_2 * k as f64;
        let v = match self.kind {
            Elementary::Exp => x.exp(),
            Elementary::Sin => (x + shift).sin(),
            Elementary::Cos => (x + shift).cos(),
        };
        S::from_f64(factor * v)
    }
}

/// Axis-aligned closed box in `ℝ^m` (the body set `U`).
#[derive(Debug, Clone, PartialEq)]
pub struct BodyBox<S> {
    lo: Vec<S>,
    hi: Vec<S>,
}

impl<S: Scalar> BodyBox<S> {
    pub fn new(lo: Vec<S>, hi: Vec<S>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch(
                "box bounds differ in length".into(),
            ));
        }
        if lo.iter().zip(&hi).any(|(a, b)| a >= b) {
            return Err(Error::Precondition(
                "box intervals must be nonempty (lo < hi)".into(),
            ));
        }
        Ok(BodyBox { lo, hi })
    }

    pub fn interval(lo: S, hi: S) -> Result<Self> {
        Self::new(vec![lo], vec![hi])
    }

    pub fn unit(m: usize) -> Self {
        BodyBox {
            lo: vec![S::zero(); m],
            hi: vec![S::one(); m],
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn lo(&self) -> &[S] {
        &self.lo
    }

    pub fn hi(&self) -> &[S] {
        &self.hi
    }

    pub fn bounds(&self) -> Vec<(S, S)> {
        self.lo
            .iter()
            .cloned()
            .zip(self.hi.iter().cloned())
            .collect()
    }

    pub fn contains(&self, p: &[S]) -> bool {
        p.len() == self.dim()
            && p.iter()
                .zip(self.lo.iter().zip(&self.hi))
                .all(|(x, (a, b))| a <= x && x <= b)
    }

    pub fn volume(&self) -> S {
        self.lo
            .iter()
            .zip(&self.hi)
            .fold(S::one(), |acc, (a, b)| acc * (b.clone() - a.clone()))
    }

    /// Tensor grid of `k` cell midpoints per axis.
    pub fn sample_grid(&self, k: usize) -> Vec<Vec<S>> {
        let k = k.max(1);
        let mut out = vec![Vec::new()];
        for (a, b) in self.lo.iter().zip(&self.hi) {
            let mut next = Vec::with_capacity(out.len() * k);
            for p in &out {
                for i in 0..k {
                    let t = S::from_ratio(2 * i as i64 + 1, 2 * k as i64);
                    let mut q = p.clone();
                    q.push(a.clone() + (b.clone() - a.clone()) * t);
                    next.push(q);
                }
            }
            out = next;
        }
        out
    }
}

/// Body box plus odd dimension: `π_B⁻¹(U) × 𝔯_od^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperDomain<S> {
    pub body: BodyBox<S>,
    pub n: usize,
}

impl<S: Scalar> SuperDomain<S> {
    pub fn new(body: BodyBox<S>, n: usize) -> Self {
        SuperDomain { body, n }
    }
}

/// A coefficient function `u_a`.
#[derive(Clone, Debug)]
pub enum CoeffFn<S: Scalar> {
    Polynomial(SuperPoly<S>),
    /// `(∂^deriv f)(x) · scale`.
    Oracle {
        oracle: Arc<dyn SmoothOracle<S>>,
        deriv: Vec<u32>,
        scale: Grassmann<S>,
    },
}

impl<S: Scalar> PartialEq for CoeffFn<S> {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (CoeffFn::Polynomial(a), CoeffFn::Polynomial(b)) => a == b,
            (
                CoeffFn::Oracle {
                    oracle: o1,
                    deriv: d1,
                    scale: s1,
                },
                CoeffFn::Oracle {
                    oracle: o2,
                    deriv: d2,
                    scale: s2,
                },
            ) => Arc::ptr_eq(o1, o2) && d1 == d2 && s1 == s2,
            _ => false,
        }
    }
}

impl<S: Scalar> CoeffFn<S> {
    pub fn oracle(oracle: Arc<dyn SmoothOracle<S>>, scale: Grassmann<S>) -> Self {
        let deriv = vec![0; oracle.dim()];
        CoeffFn::Oracle {
            oracle,
            deriv,
            scale,
        }
    }

    fn dim(&self) -> usize {
        match self {
            CoeffFn::Polynomial(p) => p.nvars(),
            CoeffFn::Oracle { oracle, .. } => oracle.dim(),
        }
    }

    pub fn level(&self) -> u32 {
        match self {
            CoeffFn::Polynomial(p) => p.level(),
            CoeffFn::Oracle { scale, .. } => scale.level(),
        }
    }

    pub fn parity(&self) -> Parity {
        match self {
            CoeffFn::Polynomial(p) => p.parity(),
            CoeffFn::Oracle { scale, .. } => scale.parity(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            CoeffFn::Polynomial(p) => p.is_zero(),
            CoeffFn::Oracle { scale, .. } => scale.is_zero(),
        }
    }

    pub fn as_poly(&self) -> Option<&SuperPoly<S>> {
        match self {
            CoeffFn::Polynomial(p) => Some(p),
            CoeffFn::Oracle { .. } => None,
        }
    }

    pub fn with_level(&self, level: u32) -> Result<Self> {
        Ok(match self {
            CoeffFn::Polynomial(p) => CoeffFn::Polynomial(p.with_level(level)?),
            CoeffFn::Oracle {
                oracle,
                deriv,
                scale,
            } => CoeffFn::Oracle {
                oracle: oracle.clone(),
                deriv: deriv.clone(),
                scale: scale.with_level(level)?,
            },
        })
    }

    fn derivative(&self, j: usize) -> Self {
        match self {
            CoeffFn::Polynomial(p) => CoeffFn::Polynomial(p.derivative(j)),
            CoeffFn::Oracle {
                oracle,
                deriv,
                scale,
            } => {
                let mut d = deriv.clone();
                d[j] += 1;
                CoeffFn::Oracle {
                    oracle: oracle.clone(),
                    deriv: d,
                    scale: scale.clone(),
                }
            }
        }
    }

    fn neg(&self) -> Self {
        match self {
            CoeffFn::Polynomial(p) => CoeffFn::Polynomial(p.neg()),
            CoeffFn::Oracle {
                oracle,
                deriv,
                scale,
            } => CoeffFn::Oracle {
                oracle: oracle.clone(),
                deriv: deriv.clone(),
                scale: -scale,
            },
        }
    }

    /// Value at a real point.
    pub fn eval_real(&self, x: &[S]) -> Grassmann<S> {
        match self {
            CoeffFn::Polynomial(p) => p.eval_real(x),
            CoeffFn::Oracle {
                oracle,
                deriv,
                scale,
            } => scale.scale(&oracle.derivative(x, deriv)),
        }
    }

    /// Grassmann continuation at even arguments of a common level.
    pub fn eval_grassmann(&self, x: &[Grassmann<S>], level: u32) -> Result<Grassmann<S>> {
        match self {
            CoeffFn::Polynomial(p) => {
                let proto = Grassmann::zero(level);
                Ok(p.eval_ring(x, &proto))
            }
            CoeffFn::Oracle {
                oracle,
                deriv,
                scale,
            } => {
                let body: Vec<S> = x.iter().map(|v| v.body()).collect();
                let souls: Vec<Grassmann<S>> = x.iter().map(|v| v.soul()).collect();
                let base: u32 = deriv.iter().sum();
                let m = x.len();
                let mut acc = Grassmann::zero(level);
                // (α, x_S^α, last axis used) at the current total degree
                let mut layer: Vec<(Vec<u32>, Grassmann<S>, usize)> =
                    vec![(vec![0; m], Grassmann::one(level), 0)];
                let mut degree = 0u32;
                while !layer.is_empty() {
                    for (alpha, mono, _) in &layer {
                        let needed = base + degree;
                        if needed > oracle.max_order() {
                            return Err(Error::OracleOrder {
                                needed,
                                available: oracle.max_order(),
                            });
                        }
                        let full: Vec<u32> = alpha.iter().zip(deriv).map(|(a, d)| a + d).collect();
                        let mut w = oracle.derivative(&body, &full);
                        for a in alpha {
                            w = w * inv_factorial::<S>(*a);
                        }
                        acc = &acc + &mono.scale(&w);
                    }
                    let mut next = Vec::new();
                    for (alpha, mono, last) in &layer {
                        for (j, soul) in souls.iter().enumerate().skip(*last) {
                            let v = mono * soul;
                            if v.is_zero() {
                                continue;
                            }
                            let mut a2 = alpha.clone();
                            a2[j] += 1;
                            next.push((a2, v, j));
                        }
                    }
                    layer = next;
                    degree += 1;
                }
                Ok(&acc * &scale.lift(level))
            }
        }
    }
}

/// `u(x,θ) = Σ_a θ^a u_a(x)` in `m|n` variables with coefficients at level `L`.
#[derive(Clone, Debug, PartialEq)]
pub struct SupersmoothFn<S: Scalar> {
    m: usize,
    n: usize,
    level: u32,
    coeffs: BTreeMap<IndexSet, CoeffFn<S>>,
    domain: Option<BodyBox<S>>,
}

pub(crate) fn check_level(level: u32) -> Result<()> {
    if level > MAX_LEVEL {
        Err(Error::LevelExceeded {
            needed: level,
            max: MAX_LEVEL,
        })
    } else {
        Ok(())
    }
}

impl<S: Scalar> SupersmoothFn<S> {
    pub fn zero(m: usize, n: usize, level: u32) -> Self {
        SupersmoothFn {
            m,
            n,
            level,
            coeffs: BTreeMap::new(),
            domain: None,
        }
    }

    pub fn from_coeffs<I>(m: usize, n: usize, level: u32, coeffs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (IndexSet, CoeffFn<S>)>,
    {
        check_level(level)?;
        let mut out = Self::zero(m, n, level);
        for (a, c) in coeffs {
            if a.max_index() as usize > n {
                return Err(Error::AxisOutOfRange {
                    axis: a.max_index() as usize,
                    max: n,
                });
            }
            if c.dim() != m {
                return Err(Error::DimensionMismatch(format!(
                    "coefficient has {} variables, expected {m}",
                    c.dim()
                )));
            }
            if c.level() > level {
                return Err(Error::LevelExceeded {
                    needed: c.level(),
                    max: level,
                });
            }
            if c.is_zero() {
                continue;
            }
            if out.coeffs.contains_key(&a) {
                return Err(Error::Precondition(format!(
                    "duplicate odd multi-index {a}"
                )));
            }
            out.coeffs.insert(a, c.with_level(level)?);
        }
        Ok(out)
    }

    /// Polynomial coefficients given per multi-index.
    pub fn from_polys<I>(m: usize, n: usize, level: u32, polys: I) -> Result<Self>
    where
        I: IntoIterator<Item = (IndexSet, SuperPoly<S>)>,
    {
        let mut out = Self::zero(m, n, level);
        for (a, p) in polys {
            if p.nvars() != m {
                return Err(Error::DimensionMismatch(format!(
                    "coefficient has {} variables, expected {m}",
                    p.nvars()
                )));
            }
            if a.max_index() as usize > n {
                return Err(Error::AxisOutOfRange {
                    axis: a.max_index() as usize,
                    max: n,
                });
            }
            let p = p.with_level(level)?;
            let sum = match out.coeffs.remove(&a) {
                Some(CoeffFn::Polynomial(q)) => q.add(&p),
                Some(_) => return Err(Error::NotPolynomial("cannot merge with oracle".into())),
                None => p,
            };
            if !sum.is_zero() {
                out.coeffs.insert(a, CoeffFn::Polynomial(sum));
            }
        }
        Ok(out)
    }

    /// `θ^∅`-only function.
    pub fn from_poly(n: usize, p: SuperPoly<S>) -> Self {
        let (m, level) = (p.nvars(), p.level());
        Self::from_polys(m, n, level, [(IndexSet::EMPTY, p)]).expect("valid polynomial")
    }

    pub fn constant(c: Grassmann<S>, m: usize, n: usize) -> Self {
        Self::from_poly(n, SuperPoly::constant(c, m))
    }

    /// The even coordinate `x_j` (1-based).
    pub fn even_var(j: usize, m: usize, n: usize, level: u32) -> Result<Self> {
        if j == 0 || j > m {
            return Err(Error::AxisOutOfRange { axis: j, max: m });
        }
        Ok(Self::from_poly(n, SuperPoly::var(j - 1, m, level)))
    }

    /// The odd coordinate `θ_k` (1-based).
    pub fn odd_var(k: usize, m: usize, n: usize, level: u32) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::AxisOutOfRange { axis: k, max: n });
        }
        Self::from_polys(
            m,
            n,
            level,
            [(IndexSet::singleton(k as u32), SuperPoly::one(m, level))],
        )
    }

    pub fn with_domain(mut self, domain: BodyBox<S>) -> Result<Self> {
        if domain.dim() != self.m {
            return Err(Error::DimensionMismatch(
                "domain dimension differs from m".into(),
            ));
        }
        self.domain = Some(domain);
        Ok(self)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn domain(&self) -> Option<&BodyBox<S>> {
        self.domain.as_ref()
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (IndexSet, &CoeffFn<S>)> + '_ {
        self.coeffs.iter().map(|(a, c)| (*a, c))
    }

    pub fn coeff(&self, a: IndexSet) -> Option<&CoeffFn<S>> {
        self.coeffs.get(&a)
    }

    /// Polynomial coefficient for `a` (zero when absent).
    pub fn coeff_poly(&self, a: IndexSet) -> Result<SuperPoly<S>> {
        match self.coeffs.get(&a) {
            None => Ok(SuperPoly::zero(self.m, self.level)),
            Some(CoeffFn::Polynomial(p)) => Ok(p.clone()),
            Some(CoeffFn::Oracle { .. }) => Err(Error::NotPolynomial(format!(
                "coefficient {a} is an oracle"
            ))),
        }
    }

    /// The `θ^{1̄}` coefficient (all odd indices present).
    pub fn top_coeff(&self) -> Option<&CoeffFn<S>> {
        self.coeffs.get(&IndexSet::range(0, self.n as u32))
    }

    pub fn is_polynomial(&self) -> bool {
        self.coeffs.values().all(|c| c.as_poly().is_some())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn parity(&self) -> Parity {
        let mut acc = None;
        for (a, c) in &self.coeffs {
            let p = Parity::of_degree(a.len()).product(c.parity());
            acc = Parity::join(acc, p);
        }
        acc.unwrap_or(Parity::Even)
    }

    pub fn with_level(&self, level: u32) -> Result<Self> {
        check_level(level)?;
        let mut coeffs = BTreeMap::new();
        for (a, c) in &self.coeffs {
            coeffs.insert(*a, c.with_level(level)?);
        }
        Ok(SupersmoothFn {
            m: self.m,
            n: self.n,
            level,
            coeffs,
            domain: self.domain.clone(),
        })
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c = c.neg();
        }
        out
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.m != other.m || self.n != other.n {
            return Err(Error::DimensionMismatch(format!(
                "{}|{} vs {}|{}",
                self.m, self.n, other.m, other.n
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let level = self.level.max(other.level);
        let mut out = self.with_level(level)?;
        for (a, c) in &other.coeffs {
            let c = c.with_level(level)?;
            let merged = match out.coeffs.remove(a) {
                None => c,
                Some(CoeffFn::Polynomial(p)) => match c {
                    CoeffFn::Polynomial(q) => CoeffFn::Polynomial(p.add(&q)),
                    _ => {
                        return Err(Error::NotPolynomial(
                            "sum of oracle and polynomial coefficient".into(),
                        ))
                    }
                },
                Some(_) => {
                    return Err(Error::NotPolynomial(
                        "sum involving an oracle coefficient".into(),
                    ))
                }
            };
            if !merged.is_zero() {
                out.coeffs.insert(*a, merged);
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Product, computed on the expanded form (polynomial data only).
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let level = self.level.max(other.level);
        let a = self.with_level(level)?.to_expanded()?;
        let b = other.with_level(level)?.to_expanded()?;
        Self::from_expanded(&a.mul(&b), self.n, level)
    }

    /// `c · u` with a Grassmann constant on the left.
    pub fn mul_const_left(&self, c: &Grassmann<S>) -> Result<Self> {
        let level = self.level.max(c.level());
        let e = self.with_level(level)?.to_expanded()?;
        Self::from_expanded(&e.mul_left(&c.lift(level + self.n as u32)), self.n, level)
    }

    /// Expanded form at level `L + n`, odd variables at `σ_{L+1..L+n}`.
    pub fn to_expanded(&self) -> Result<SuperPoly<S>> {
        let total = self.level + self.n as u32;
        check_level(total)?;
        let mut out = SuperPoly::zero(self.m, total);
        for (a, c) in &self.coeffs {
            let p = c.as_poly().ok_or_else(|| {
                Error::NotPolynomial("expansion needs polynomial coefficients".into())
            })?;
            let theta = Grassmann::monomial(a.shifted(self.level), S::one(), total);
            out = out.add(&p.lift(total).mul_left(&theta));
        }
        Ok(out)
    }

    /// Reads back an expanded polynomial whose odd block sits at `offset`.
    pub fn from_expanded(p: &SuperPoly<S>, n: usize, offset: u32) -> Result<Self> {
        let parts = p.split_block(offset, n as u32)?;
        let mut out = Self::zero(p.nvars(), n, offset);
        for (a, q) in parts {
            out.coeffs.insert(a, CoeffFn::Polynomial(q));
        }
        Ok(out)
    }

    /// Grassmann continuation `Σ_a θ^a Σ_α (1/α!) ∂^α u_a(x_B) x_S^α`.
    pub fn ss_eval(&self, x: &[Grassmann<S>], theta: &[Grassmann<S>]) -> Result<Grassmann<S>> {
        if x.len() != self.m || theta.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "point has {}|{} coordinates, function expects {}|{}",
                x.len(),
                theta.len(),
                self.m,
                self.n
            )));
        }
        let level = x
            .iter()
            .chain(theta)
            .map(|v| v.level())
            .fold(self.level, u32::max);
        for (j, v) in x.iter().enumerate() {
            if v.parity() != Parity::Even {
                return Err(Error::ParityViolation(format!(
                    "even coordinate {} is not even",
                    j + 1
                )));
            }
        }
        for (k, v) in theta.iter().enumerate() {
            if !v.is_zero() && v.parity() != Parity::Odd {
                return Err(Error::ParityViolation(format!(
                    "odd coordinate {} is not odd",
                    k + 1
                )));
            }
        }
        if let Some(dom) = &self.domain {
            let body: Vec<S> = x.iter().map(|v| v.body()).collect();
            if !dom.contains(&body) {
                return Err(Error::OutsideDomain {
                    point: body.iter().map(|v| v.to_f64()).collect(),
                });
            }
        }
        let x: Vec<Grassmann<S>> = x.iter().map(|v| v.lift(level)).collect();
        let theta: Vec<Grassmann<S>> = theta.iter().map(|v| v.lift(level)).collect();
        let mut acc = Grassmann::zero(level);
        for (a, c) in &self.coeffs {
            let mut mono = Grassmann::one(level);
            for k in a.iter() {
                mono = &mono * &theta[k as usize - 1];
            }
            if mono.is_zero() {
                continue;
            }
            let v = c.eval_grassmann(&x, level)?;
            acc = &acc + &(&mono * &v);
        }
        Ok(acc)
    }

    /// Evaluation at a [`SuperPoint`].
    pub fn eval_at(&self, p: &SuperPoint<S>) -> Result<Grassmann<S>> {
        self.ss_eval(&p.even, &p.odd)
    }

    /// `∂/∂x_j` (1-based).
    pub fn d_even(&self, j: usize) -> Result<Self> {
        if j == 0 || j > self.m {
            return Err(Error::AxisOutOfRange {
                axis: j,
                max: self.m,
            });
        }
        let mut out = Self::zero(self.m, self.n, self.level);
        out.domain = self.domain.clone();
        for (a, c) in &self.coeffs {
            let d = c.derivative(j - 1);
            if !d.is_zero() {
                out.coeffs.insert(*a, d);
            }
        }
        Ok(out)
    }

    /// Left derivative `∂/∂θ_k` (1-based).
    pub fn d_odd(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.n {
            return Err(Error::AxisOutOfRange {
                axis: k,
                max: self.n,
            });
        }
        let k = k as u32;
        let mut out = Self::zero(self.m, self.n, self.level);
        out.domain = self.domain.clone();
        for (a, c) in &self.coeffs {
            if !a.contains(k) {
                continue;
            }
            let c = if a.count_below(k) % 2 == 1 {
                c.neg()
            } else {
                c.clone()
            };
            out.coeffs.insert(a.remove(k), c);
        }
        Ok(out)
    }
}

impl<S: Scalar> fmt::Display for SupersmoothFn<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (i, (a, c)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if !a.is_empty() {
                write!(f, "th{a}*")?;
            }
            match c {
                CoeffFn::Polynomial(p) => write!(f, "[{p}]")?,
                CoeffFn::Oracle { deriv, scale, .. } => {
                    write!(f, "[oracle d{deriv:?} * ({scale})]")?
                }
            }
        }
        Ok(())
    }
}

/// A point of `Λ^{m|n}`: even coordinates and odd coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperPoint<S: Scalar> {
    pub even: Vec<Grassmann<S>>,
    pub odd: Vec<Grassmann<S>>,
}

impl<S: Scalar> SuperPoint<S> {
    pub fn new(even: Vec<Grassmann<S>>, odd: Vec<Grassmann<S>>) -> Self {
        SuperPoint { even, odd }
    }

    /// Real body point with the odd coordinates set to generic generators
    /// `σ_{offset+1..offset+n}` (or zero when `offset` is `None`).
    pub fn real(q: &[S], n: usize, odd_offset: Option<u32>, level: u32) -> Self {
        let even = q
            .iter()
            .map(|v| Grassmann::scalar(v.clone(), level))
            .collect();
        let odd = (0..n)
            .map(|k| match odd_offset {
                Some(off) => {
                    Grassmann::monomial(IndexSet::singleton(off + k as u32 + 1), S::one(), level)
                }
                None => Grassmann::zero(level),
            })
            .collect();
        SuperPoint { even, odd }
    }

    pub fn level(&self) -> u32 {
        self.even
            .iter()
            .chain(&self.odd)
            .map(|v| v.level())
            .max()
            .unwrap_or(0)
    }

    pub fn body(&self) -> Vec<S> {
        self.even.iter().map(|v| v.body()).collect()
    }
}

/// Anything that maps super points and has a pointwise super-Jacobian.
pub trait PointMap<S: Scalar> {
    /// Level of the constant data, excluding the odd source variables.
    fn level(&self) -> u32;
    fn source_dims(&self) -> (usize, usize);
    fn target_dims(&self) -> (usize, usize);
    fn eval_point(&self, p: &SuperPoint<S>) -> Result<SuperPoint<S>>;
    fn jacobian_point(&self, p: &SuperPoint<S>) -> Result<EvenSuperMatrix<Grassmann<S>>>;
}

/// Anything that yields a Grassmann value at a super point.
pub trait PointFn<S: Scalar> {
    fn level(&self) -> u32;
    fn dims(&self) -> (usize, usize);
    fn eval_point(&self, p: &SuperPoint<S>) -> Result<Grassmann<S>>;
}

impl<S: Scalar> PointFn<S> for SupersmoothFn<S> {
    fn level(&self) -> u32 {
        self.level
    }

    fn dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    fn eval_point(&self, p: &SuperPoint<S>) -> Result<Grassmann<S>> {
        self.eval_at(p)
    }
}

/// Even and odd components of a map in expanded form.
pub type ExpandedComponents<S> = (Vec<SuperPoly<S>>, Vec<SuperPoly<S>>);

/// `(φ_0̄(y,ω), φ_1̄(y,ω))`: even and odd component functions of `m|n` variables.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperMap<S: Scalar> {
    m: usize,
    n: usize,
    even: Vec<SupersmoothFn<S>>,
    odd: Vec<SupersmoothFn<S>>,
}

impl<S: Scalar> SuperMap<S> {
    pub fn new(
        m: usize,
        n: usize,
        even: Vec<SupersmoothFn<S>>,
        odd: Vec<SupersmoothFn<S>>,
    ) -> Result<Self> {
        for (kind, comps, want) in [("even", &even, Parity::Even), ("odd", &odd, Parity::Odd)] {
            for (i, c) in comps.iter().enumerate() {
                if c.m() != m || c.n() != n {
                    return Err(Error::DimensionMismatch(format!(
                        "{kind} component {} has dims {}|{}, map source is {m}|{n}",
                        i + 1,
                        c.m(),
                        c.n()
                    )));
                }
                if !c.is_zero() && c.parity() != want {
                    return Err(Error::ParityViolation(format!(
                        "{kind} component {} has parity {:?}",
                        i + 1,
                        c.parity()
                    )));
                }
            }
        }
        let level = even
            .iter()
            .chain(&odd)
            .map(|c| c.level())
            .max()
            .unwrap_or(0);
        let even = even
            .iter()
            .map(|c| c.with_level(level))
            .collect::<Result<_>>()?;
        let odd = odd
            .iter()
            .map(|c| c.with_level(level))
            .collect::<Result<_>>()?;
        Ok(SuperMap { m, n, even, odd })
    }

    pub fn identity(m: usize, n: usize, level: u32) -> Self {
        let even = (1..=m)
            .map(|j| SupersmoothFn::even_var(j, m, n, level).unwrap())
            .collect();
        let odd = (1..=n)
            .map(|k| SupersmoothFn::odd_var(k, m, n, level).unwrap())
            .collect();
        SuperMap { m, n, even, odd }
    }

    /// The linear map `(x,θ) = (y,ω)M` for a constant supermatrix.
    pub fn linear(mat: &EvenSuperMatrix<Grassmann<S>>) -> Result<Self> {
        let (m, n) = mat.dims();
        let level = mat.a.proto().level();
        let ys: Vec<SupersmoothFn<S>> = (1..=m)
            .map(|j| SupersmoothFn::even_var(j, m, n, level))
            .collect::<Result<_>>()?;
        let ws: Vec<SupersmoothFn<S>> = (1..=n)
            .map(|k| SupersmoothFn::odd_var(k, m, n, level))
            .collect::<Result<_>>()?;
        let comb = |col_src: &dyn Fn(usize, usize) -> Grassmann<S>,
                    rows_even: &[SupersmoothFn<S>],
                    rows_odd: &[SupersmoothFn<S>],
                    j: usize|
         -> Result<SupersmoothFn<S>> {
            let mut acc = SupersmoothFn::zero(m, n, level);
            for (i, v) in rows_even.iter().chain(rows_odd).enumerate() {
                let c = col_src(i, j);
                if c.is_zero() {
                    continue;
                }
                // y_i M_ij: the variable stands left of the entry
                let e = v.to_expanded()?.mul_right(&c.lift(level + n as u32));
                acc = acc.add(&SupersmoothFn::from_expanded(&e, n, level)?)?;
            }
            Ok(acc)
        };
        let full = mat.to_full();
        let entry = |i: usize, j: usize| full.get(i, j).clone();
        let even = (0..m)
            .map(|j| comb(&entry, &ys, &ws, j))
            .collect::<Result<_>>()?;
        let odd = (0..n)
            .map(|j| comb(&entry, &ys, &ws, m + j))
            .collect::<Result<_>>()?;
        Self::new(m, n, even, odd)
    }

    pub fn source_dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn target_dims(&self) -> (usize, usize) {
        (self.even.len(), self.odd.len())
    }

    pub fn level(&self) -> u32 {
        self.even
            .iter()
            .chain(&self.odd)
            .map(|c| c.level())
            .max()
            .unwrap_or(0)
    }

    pub fn even(&self) -> &[SupersmoothFn<S>] {
        &self.even
    }

    pub fn odd(&self) -> &[SupersmoothFn<S>] {
        &self.odd
    }

    pub fn is_polynomial(&self) -> bool {
        self.even.iter().chain(&self.odd).all(|c| c.is_polynomial())
    }

    pub fn with_level(&self, level: u32) -> Result<Self> {
        Ok(SuperMap {
            m: self.m,
            n: self.n,
            even: self
                .even
                .iter()
                .map(|c| c.with_level(level))
                .collect::<Result<_>>()?,
            odd: self
                .odd
                .iter()
                .map(|c| c.with_level(level))
                .collect::<Result<_>>()?,
        })
    }

    pub fn eval(&self, p: &SuperPoint<S>) -> Result<SuperPoint<S>> {
        let even = self
            .even
            .iter()
            .map(|c| c.eval_at(p))
            .collect::<Result<_>>()?;
        let odd = self
            .odd
            .iter()
            .map(|c| c.eval_at(p))
            .collect::<Result<_>>()?;
        Ok(SuperPoint { even, odd })
    }

    /// Derivative functions in Jacobian layout: rows `y_1..y_m, ω_1..ω_n`,
    /// columns `x_1..x_m', θ_1..θ_n'`.
    pub fn jacobian_fns(&self) -> Result<Vec<Vec<SupersmoothFn<S>>>> {
        let cols: Vec<&SupersmoothFn<S>> = self.even.iter().chain(&self.odd).collect();
        let mut rows = Vec::with_capacity(self.m + self.n);
        for i in 1..=self.m {
            rows.push(
                cols.iter()
                    .map(|c| c.d_even(i))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        for k in 1..=self.n {
            rows.push(
                cols.iter()
                    .map(|c| c.d_odd(k))
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        Ok(rows)
    }

    /// Symbolic Jacobian over the expanded ring (level `L + n`).
    pub fn jacobian_expanded(&self) -> Result<EvenSuperMatrix<SuperPoly<S>>> {
        if self.target_dims() != self.source_dims() {
            return Err(Error::DimensionMismatch(
                "Jacobian of a non-square map".into(),
            ));
        }
        let rows = self.jacobian_fns()?;
        let level = self.level() + self.n as u32;
        check_level(level)?;
        let proto = SuperPoly::zero(self.m, level);
        let mut out = Vec::with_capacity(rows.len());
        for row in rows {
            out.push(
                row.iter()
                    .map(|f| f.to_expanded())
                    .collect::<Result<Vec<_>>>()?,
            );
        }
        let full = Mat::from_rows(out, &proto)?;
        EvenSuperMatrix::from_full(&full, self.m, self.n)
    }

    /// Pointwise Jacobian.
    pub fn jacobian_at(&self, p: &SuperPoint<S>) -> Result<EvenSuperMatrix<Grassmann<S>>> {
        self.prepare()?.jacobian_point(p)
    }

    /// Caches derivative functions for repeated pointwise evaluation.
    pub fn prepare(&self) -> Result<PreparedMap<S>> {
        Ok(PreparedMap {
            map: self.clone(),
            rows: self.jacobian_fns()?,
        })
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &SuperMap<S>) -> Result<SuperMap<S>> {
        if self.source_dims() != inner.target_dims() {
            return Err(Error::DimensionMismatch(format!(
                "outer source {:?} vs inner target {:?}",
                self.source_dims(),
                inner.target_dims()
            )));
        }
        let even = self
            .even
            .iter()
            .map(|c| compose(c, inner))
            .collect::<Result<_>>()?;
        let odd = self
            .odd
            .iter()
            .map(|c| compose(c, inner))
            .collect::<Result<_>>()?;
        SuperMap::new(inner.m, inner.n, even, odd)
    }

    /// Expanded components at a common level `L + n`.
    pub fn expanded_components(&self, level: u32) -> Result<ExpandedComponents<S>> {
        let even = self
            .even
            .iter()
            .map(|c| c.with_level(level)?.to_expanded())
            .collect::<Result<_>>()?;
        let odd = self
            .odd
            .iter()
            .map(|c| c.with_level(level)?.to_expanded())
            .collect::<Result<_>>()?;
        Ok((even, odd))
    }
}

/// A [`SuperMap`] with its derivative functions precomputed.
#[derive(Clone, Debug)]
pub struct PreparedMap<S: Scalar> {
    map: SuperMap<S>,
    rows: Vec<Vec<SupersmoothFn<S>>>,
}

impl<S: Scalar> PreparedMap<S> {
    pub fn map(&self) -> &SuperMap<S> {
        &self.map
    }
}

impl<S: Scalar> PointMap<S> for PreparedMap<S> {
    fn level(&self) -> u32 {
        self.map.level()
    }

    fn source_dims(&self) -> (usize, usize) {
        self.map.source_dims()
    }

    fn target_dims(&self) -> (usize, usize) {
        self.map.target_dims()
    }

    fn eval_point(&self, p: &SuperPoint<S>) -> Result<SuperPoint<S>> {
        self.map.eval(p)
    }

    fn jacobian_point(&self, p: &SuperPoint<S>) -> Result<EvenSuperMatrix<Grassmann<S>>> {
        let level = p.level().max(self.map.level());
        let proto = Grassmann::zero(level);
        let rows = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|f| f.eval_at(p).map(|v| v.lift(level)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let full = Mat::from_rows(rows, &proto)?;
        let (m, n) = self.map.source_dims();
        if self.map.target_dims() != (m, n) {
            return Err(Error::DimensionMismatch(
                "Jacobian of a non-square map".into(),
            ));
        }
        EvenSuperMatrix::from_full(&full, m, n)
    }
}

/// `outer ∘ inner`, evaluated pointwise; Jacobians chain as `J(inner)·J(outer)∘inner`.
pub struct Composed<'a, S: Scalar> {
    pub outer: &'a dyn PointMap<S>,
    pub inner: &'a dyn PointMap<S>,
}

impl<S: Scalar> PointMap<S> for Composed<'_, S> {
    fn level(&self) -> u32 {
        self.outer.level().max(self.inner.level())
    }

    fn source_dims(&self) -> (usize, usize) {
        self.inner.source_dims()
    }

    fn target_dims(&self) -> (usize, usize) {
        self.outer.target_dims()
    }

    fn eval_point(&self, p: &SuperPoint<S>) -> Result<SuperPoint<S>> {
        self.outer.eval_point(&self.inner.eval_point(p)?)
    }

    fn jacobian_point(&self, p: &SuperPoint<S>) -> Result<EvenSuperMatrix<Grassmann<S>>> {
        let mid = self.inner.eval_point(p)?;
        let ji = self.inner.jacobian_point(p)?;
        let jo = self.outer.jacobian_point(&mid)?;
        let level = ji.a.proto().level().max(jo.a.proto().level());
        crate::supermatrix::sm_mul(&ji.map(|v| v.lift(level)), &jo.map(|v| v.lift(level)))
    }
}

/// Density `sdet J(φ)·ρ∘φ`, evaluated pointwise.
pub struct PulledBack<'a, S: Scalar> {
    pub map: &'a dyn PointMap<S>,
    pub density: &'a dyn PointFn<S>,
}

impl<S: Scalar> PointFn<S> for PulledBack<'_, S> {
    fn level(&self) -> u32 {
        self.map.level().max(self.density.level())
    }

    fn dims(&self) -> (usize, usize) {
        self.map.source_dims()
    }

    fn eval_point(&self, p: &SuperPoint<S>) -> Result<Grassmann<S>> {
        let img = self.map.eval_point(p)?;
        let ber = sdet(&self.map.jacobian_point(p)?)?;
        let v = self.density.eval_point(&img)?;
        let level = ber.level().max(v.level());
        Ok(&ber.lift(level) * &v.lift(level))
    }
}

/// Substitutes the map `φ` into `u` (polynomial data only): `u(φ(y,ω))`.
pub fn compose<S: Scalar>(u: &SupersmoothFn<S>, phi: &SuperMap<S>) -> Result<SupersmoothFn<S>> {
    if (u.m(), u.n()) != phi.target_dims() {
        return Err(Error::DimensionMismatch(format!(
            "function expects {}|{} arguments, map yields {:?}",
            u.m(),
            u.n(),
            phi.target_dims()
        )));
    }
    if !u.is_polynomial() || !phi.is_polynomial() {
        return Err(Error::NotPolynomial(
            "symbolic composition; use pointwise evaluation for oracles".into(),
        ));
    }
    let (m, n) = phi.source_dims();
    let level = u.level().max(phi.level());
    let total = level + n as u32;
    check_level(total)?;
    let (xs, ths) = phi.expanded_components(level)?;
    let proto = SuperPoly::zero(m, total);
    let mut acc = proto.clone();
    for (a, c) in u.coeffs() {
        let mut mono = proto.one_like();
        for k in a.iter() {
            mono = mono.mul(&ths[k as usize - 1]);
        }
        if mono.is_zero() {
            continue;
        }
        let p = c.as_poly().expect("checked polynomial");
        acc = acc.add(&mono.mul(&p.eval_ring(&xs, &proto)));
    }
    SupersmoothFn::from_expanded(&acc, n, level)
}

/// Outcome of [`is_superdiffeo`].
#[derive(Debug, Clone, PartialEq)]
pub struct SuperdiffeoCheck {
    pub ok: bool,
    pub witness: Option<(Vec<f64>, String)>,
}

pub(crate) fn body_det<S: Scalar>(blk: &Mat<Grassmann<S>>) -> Result<S> {
    let proto = Grassmann::zero(0);
    let body = Mat::from_rows(
        (0..blk.rows())
            .map(|i| {
                (0..blk.cols())
                    .map(|j| Grassmann::scalar(blk.get(i, j).body(), 0))
                    .collect()
            })
            .collect(),
        &proto,
    )?;
    Ok(body.even_det()?.body())
}

pub(crate) fn negligible<S: Scalar>(v: &S) -> bool {
    if S::EXACT {
        v.is_zero()
    } else {
        v.magnitude() < 1e-12
    }
}

/// Sampling certificate: body determinants nonzero with constant sign and
/// body map injective on a grid of `samples` points per axis.
pub fn is_superdiffeo<S: Scalar>(
    phi: &SuperMap<S>,
    dom: &SuperDomain<S>,
    samples: usize,
) -> Result<SuperdiffeoCheck> {
    let (m, n) = phi.source_dims();
    if phi.target_dims() != (m, n) || dom.body.dim() != m || dom.n != n {
        return Err(Error::DimensionMismatch(
            "is_superdiffeo needs a square map matching the domain".into(),
        ));
    }
    let prepared = phi.prepare()?;
    let level = phi.level();
    let to_f = |q: &[S]| q.iter().map(|v| v.to_f64()).collect::<Vec<_>>();
    let mut images: Vec<(Vec<S>, Vec<S>)> = Vec::new();
    let mut sign: Option<bool> = None;
    for q in dom.body.sample_grid(samples) {
        let p = SuperPoint::real(&q, n, None, level);
        let j = prepared.jacobian_point(&p)?;
        let da = body_det(&j.a)?;
        let db = body_det(&j.b)?;
        if negligible(&da) || negligible(&db) {
            return Ok(SuperdiffeoCheck {
                ok: false,
                witness: Some((to_f(&q), "body super-Jacobian is singular".into())),
            });
        }
        let positive = da > S::zero();
        if let Some(s) = sign {
            if s != positive {
                return Ok(SuperdiffeoCheck {
                    ok: false,
                    witness: Some((to_f(&q), "body Jacobian determinant changes sign".into())),
                });
            }
        }
        sign = Some(positive);
        let img = prepared.eval_point(&p)?.body();
        if let Some((other, _)) = images.iter().find(|(_, im)| {
            im.iter()
                .zip(&img)
                .all(|(a, b)| negligible(&(a.clone() - b.clone())))
        }) {
            return Ok(SuperdiffeoCheck {
                ok: false,
                witness: Some((
                    to_f(&q),
                    format!("body map not injective: same image as {:?}", to_f(other)),
                )),
            });
        }
        images.push((q, img));
    }
    Ok(SuperdiffeoCheck {
        ok: true,
        witness: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Q;

    fn qi(v: i64) -> Q {
        Q::from_integer(v.into())
    }

    #[test]
    fn continuation_of_square() {
        let u = SupersmoothFn::from_poly(0, SuperPoly::<Q>::var(0, 1, 2).pow(2));
        let x = Grassmann::parse("1 + s[1,2]", 2).unwrap();
        assert_eq!(
            u.ss_eval(&[x], &[]).unwrap(),
            Grassmann::parse("1 + 2*s[1,2]", 2).unwrap()
        );
    }

    #[test]
    fn odd_monomial_substitution() {
        let u = SupersmoothFn::<Q>::from_polys(
            1,
            2,
            2,
            [(IndexSet::range(0, 2), SuperPoly::one(1, 2))],
        )
        .unwrap();
        let s1 = Grassmann::generator(1, 2).unwrap();
        let s2 = Grassmann::generator(2, 2).unwrap();
        let v = u.ss_eval(&[Grassmann::from_i64(5, 2)], &[s1, s2]).unwrap();
        assert_eq!(v, Grassmann::parse("s[1,2]", 2).unwrap());
    }

    #[test]
    fn odd_derivative_signs() {
        let u = SupersmoothFn::<Q>::from_polys(
            0,
            2,
            0,
            [(IndexSet::range(0, 2), SuperPoly::one(0, 0))],
        )
        .unwrap();
        let d1 = u.d_odd(1).unwrap();
        let d2 = u.d_odd(2).unwrap();
        assert_eq!(d1, SupersmoothFn::odd_var(2, 0, 2, 0).unwrap());
        assert_eq!(d2, SupersmoothFn::odd_var(1, 0, 2, 0).unwrap().neg());
        assert!(d1.d_odd(1).unwrap().is_zero());
    }

    #[test]
    fn oracle_continuation_matches_taylor() {
        let o: Arc<dyn SmoothOracle<f64>> =
            Arc::new(ElementaryOracle::new(Elementary::Exp, 1, 0, 1.0));
        let u = SupersmoothFn::from_coeffs(
            1,
            0,
            2,
            [(IndexSet::EMPTY, CoeffFn::oracle(o, Grassmann::one(2)))],
        )
        .unwrap();
        let x = Grassmann::parse("0.5 + s[1,2]", 2).unwrap();
        let v = u.ss_eval(&[x], &[]).unwrap();
        let e = 0.5f64.exp();
        assert!((v.body() - e).abs() < 1e-15);
        assert!((v.coeff(IndexSet::range(0, 2)) - e).abs() < 1e-15);
    }

    #[test]
    fn oracle_order_is_enforced() {
        let mut o = ElementaryOracle::new(Elementary::Sin, 1, 0, 1.0);
        o.order = 1;
        let o: Arc<dyn SmoothOracle<f64>> = Arc::new(o);
        let u = SupersmoothFn::from_coeffs(
            1,
            0,
            4,
            [(IndexSet::EMPTY, CoeffFn::oracle(o, Grassmann::one(4)))],
        )
        .unwrap();
        let x = Grassmann::parse("0.5 + s[1,2] + s[3,4]", 4).unwrap();
        assert!(matches!(
            u.ss_eval(&[x], &[]),
            Err(Error::OracleOrder {
                needed: 2,
                available: 1
            })
        ));
    }

    #[test]
    fn square_map_is_not_superdiffeo() {
        let y = SuperPoly::<Q>::var(0, 1, 0);
        let phi = SuperMap::new(1, 0, vec![SupersmoothFn::from_poly(0, y.pow(2))], vec![]).unwrap();
        let dom = SuperDomain::new(BodyBox::interval(qi(-1), qi(1)).unwrap(), 0);
        let check = is_superdiffeo(&phi, &dom, 9).unwrap();
        assert!(!check.ok);
        let (at, _) = check.witness.unwrap();
        assert!(at[0].abs() < 0.2);
        let id = SuperMap::<Q>::identity(1, 0, 0);
        assert!(is_superdiffeo(&id, &dom, 9).unwrap().ok);
    }
}
