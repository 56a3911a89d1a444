//! Polynomials in real even variables with Grassmann-constant coefficients.

use std::collections::BTreeMap;
use std::fmt;

use crate::algebra::{AlgebraError, Grassmann, IndexSet, Parity};
use crate::ring::SuperRing;
use crate::scalar::Scalar;

/// `Σ_β x^β c_β` with `c_β ∈ Λ_L`. The variables are real (even), so the
/// coefficient side does not matter for products of monomials.
#[derive(Clone, PartialEq)]
pub struct SuperPoly<S> {
    nvars: usize,
    level: u32,
    terms: BTreeMap<Vec<u32>, Grassmann<S>>,
}

impl<S: Scalar> SuperPoly<S> {
    pub fn zero(nvars: usize, level: u32) -> Self {
        SuperPoly {
            nvars,
            level,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: Grassmann<S>, nvars: usize) -> Self {
        let level = c.level();
        Self::monomial(vec![0; nvars], c, level)
    }

    pub fn scalar(c: S, nvars: usize, level: u32) -> Self {
        Self::constant(Grassmann::scalar(c, level), nvars)
    }

    pub fn one(nvars: usize, level: u32) -> Self {
        Self::scalar(S::one(), nvars, level)
    }

    /// The coordinate `x_j` (0-based).
    pub fn var(j: usize, nvars: usize, level: u32) -> Self {
        assert!(j < nvars, "variable {j} out of range");
        let mut e = vec![0; nvars];
        e[j] = 1;
        Self::monomial(e, Grassmann::one(level), level)
    }

    pub fn monomial(exps: Vec<u32>, c: Grassmann<S>, level: u32) -> Self {
        assert_eq!(c.level(), level, "coefficient level mismatch");
        let nvars = exps.len();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        SuperPoly {
            nvars,
            level,
            terms,
        }
    }

    /// Real polynomial in one variable from ascending coefficients.
    pub fn univariate(coeffs: &[S], level: u32) -> Self {
        let mut p = Self::zero(1, level);
        for (k, c) in coeffs.iter().enumerate() {
            p.add_term(vec![k as u32], Grassmann::scalar(c.clone(), level));
        }
        p
    }

    /// Univariate polynomial with Grassmann coefficients (ascending powers).
    pub fn univariate_grassmann(coeffs: &[Grassmann<S>], level: u32) -> Self {
        let mut p = Self::zero(1, level);
        for (k, c) in coeffs.iter().enumerate() {
            p.add_term(vec![k as u32], c.lift(level));
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Grassmann<S>)> + '_ {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, exps: &[u32]) -> Grassmann<S> {
        self.terms
            .get(exps)
            .cloned()
            .unwrap_or_else(|| Grassmann::zero(self.level))
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: Grassmann<S>) {
        assert_eq!(exps.len(), self.nvars, "exponent arity mismatch");
        if c.is_zero() {
            return;
        }
        let c = if c.level() == self.level {
            c
        } else {
            c.lift(self.level)
        };
        match self.terms.get_mut(&exps) {
            Some(v) => {
                *v = &*v + &c;
                if v.is_zero() {
                    self.terms.remove(&exps);
                }
            }
            None => {
                self.terms.insert(exps, c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree (0 for the zero polynomial).
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn degree_in(&self, j: usize) -> u32 {
        self.terms.keys().map(|e| e[j]).max().unwrap_or(0)
    }

    pub fn with_level(&self, level: u32) -> Result<Self, AlgebraError> {
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            terms.insert(e.clone(), c.with_level(level)?);
        }
        Ok(SuperPoly {
            nvars: self.nvars,
            level,
            terms,
        })
    }

    pub fn lift(&self, level: u32) -> Self {
        self.with_level(level)
            .expect("polynomial does not fit the requested level")
    }

    pub fn parity(&self) -> Parity {
        let mut acc = None;
        for c in self.terms.values() {
            let p = c.parity();
            acc = Parity::join(acc, p);
        }
        acc.unwrap_or(Parity::Even)
    }

    fn same_shape(&self, other: &Self) {
        assert_eq!(self.nvars, other.nvars, "polynomial arity mismatch");
        assert_eq!(self.level, other.level, "polynomial level mismatch");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.same_shape(other);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let terms = self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect();
        SuperPoly {
            nvars: self.nvars,
            level: self.level,
            terms,
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.same_shape(other);
        let mut out = Self::zero(self.nvars, self.level);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let c = ca * cb;
                if c.is_zero() {
                    continue;
                }
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, c);
            }
        }
        out
    }

    /// `c · p` with the constant on the left.
    pub fn mul_left(&self, c: &Grassmann<S>) -> Self {
        let c = c.lift(self.level);
        let mut out = Self::zero(self.nvars, self.level);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), &c * v);
        }
        out
    }

    /// `p · c` with the constant on the right.
    pub fn mul_right(&self, c: &Grassmann<S>) -> Self {
        let c = c.lift(self.level);
        let mut out = Self::zero(self.nvars, self.level);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), v * &c);
        }
        out
    }

    pub fn scale(&self, s: &S) -> Self {
        let mut out = Self::zero(self.nvars, self.level);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), v.scale(s));
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.nvars, self.level);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// Applies `f` to every coefficient.
    pub fn map_coeffs(&self, f: impl Fn(&Grassmann<S>) -> Grassmann<S>) -> Self {
        let mut out = Self::zero(self.nvars, self.level);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), f(v));
        }
        out
    }

    /// `∂/∂x_j` (0-based).
    pub fn derivative(&self, j: usize) -> Self {
        let mut out = Self::zero(self.nvars, self.level);
        for (e, c) in &self.terms {
            if e[j] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[j] -= 1;
            out.add_term(e2, c.scale(&S::from_i64(e[j] as i64)));
        }
        out
    }

    /// Antiderivative in `x_j` vanishing at `x_j = 0`.
    pub fn antiderivative(&self, j: usize) -> Self {
        let mut out = Self::zero(self.nvars, self.level);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2[j] += 1;
            let k = S::from_i64(e2[j] as i64);
            out.add_term(e2, c.scale(&(S::one() / k)));
        }
        out
    }

    /// Substitutes the real value `x_j = v`, keeping the variable slot.
    pub fn substitute(&self, j: usize, v: &S) -> Self {
        let mut out = Self::zero(self.nvars, self.level);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            let k = e2[j];
            e2[j] = 0;
            out.add_term(e2, c.scale(&crate::scalar::powi(v, k)));
        }
        out
    }

    /// Removes variable `j`, which must not occur.
    pub fn drop_var(&self, j: usize) -> Self {
        let mut out = Self::zero(self.nvars - 1, self.level);
        for (e, c) in &self.terms {
            assert_eq!(e[j], 0, "dropping a variable that still occurs");
            let mut e2 = e.clone();
            e2.remove(j);
            out.add_term(e2, c.clone());
        }
        out
    }

    /// Appends `extra` variables that do not occur.
    pub fn extend_vars(&self, extra: usize) -> Self {
        let mut out = Self::zero(self.nvars + extra, self.level);
        for (e, c) in &self.terms {
            let mut e2 = e.clone();
            e2.extend(std::iter::repeat_n(0, extra));
            out.add_term(e2, c.clone());
        }
        out
    }

    /// `∫_lo^hi dx_j`, removing the variable.
    pub fn integrate_var(&self, j: usize, lo: &S, hi: &S) -> Self {
        let anti = self.antiderivative(j);
        anti.substitute(j, hi)
            .sub(&anti.substitute(j, lo))
            .drop_var(j)
    }

    /// Exact integral over a box given as `(lo, hi)` per axis.
    pub fn integrate_box(&self, bounds: &[(S, S)]) -> Grassmann<S> {
        assert_eq!(bounds.len(), self.nvars, "box arity mismatch");
        let mut p = self.clone();
        for (lo, hi) in bounds.iter().rev() {
            let j = p.nvars - 1;
            p = p.integrate_var(j, lo, hi);
        }
        p.coeff(&[])
    }

    /// Evaluates at a real point.
    pub fn eval_real(&self, point: &[S]) -> Grassmann<S> {
        assert_eq!(point.len(), self.nvars, "point arity mismatch");
        let mut out = Grassmann::zero(self.level);
        for (e, c) in &self.terms {
            let mut m = S::one();
            for (x, k) in point.iter().zip(e) {
                m = m * crate::scalar::powi(x, *k);
            }
            out = &out + &c.scale(&m);
        }
        out
    }

    /// Evaluates with ring-valued arguments. Arguments must be even; the
    /// coefficient is multiplied on the left of the monomial value.
    pub fn eval_ring<R: SuperRing<Scalar = S>>(&self, args: &[R], proto: &R) -> R {
        assert_eq!(args.len(), self.nvars, "argument arity mismatch");
        let mut powers: Vec<Vec<R>> = Vec::with_capacity(self.nvars);
        for (j, a) in args.iter().enumerate() {
            let top = self.degree_in(j) as usize;
            let mut pw = vec![proto.one_like()];
            for k in 1..=top {
                let next = pw[k - 1].mul(a);
                pw.push(next);
            }
            powers.push(pw);
        }
        let mut acc = proto.zero_like();
        for (e, c) in &self.terms {
            let mut m = proto.embed_grassmann(c);
            for (j, k) in e.iter().enumerate() {
                if *k > 0 {
                    m = m.mul(&powers[j][*k as usize]);
                }
            }
            acc = acc.add(&m);
        }
        acc
    }

    /// Coefficientwise body: a real polynomial at level 0.
    pub fn body_poly(&self) -> SuperPoly<S> {
        let mut out = Self::zero(self.nvars, 0);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), Grassmann::scalar(c.body(), 0));
        }
        out
    }

    /// `Some(c)` when the body polynomial is the constant `c`.
    pub fn constant_body(&self) -> Option<S> {
        let zero_exp = vec![0; self.nvars];
        for (e, c) in &self.terms {
            if *e != zero_exp && !c.body().is_zero() {
                return None;
            }
        }
        Some(self.coeff(&zero_exp).body())
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.max_abs()).fold(0.0, f64::max)
    }

    /// Applies the left derivative by generator `g` to every coefficient.
    pub fn left_derivative(&self, g: u32) -> Self {
        self.map_coeffs(|c| c.left_derivative(g))
    }

    /// Right-coefficient split of a generator block, see [`Grassmann::split_block`].
    pub fn split_block(
        &self,
        offset: u32,
        n: u32,
    ) -> Result<BTreeMap<IndexSet, SuperPoly<S>>, AlgebraError> {
        let mut out: BTreeMap<IndexSet, SuperPoly<S>> = BTreeMap::new();
        for (e, c) in &self.terms {
            for (a, part) in c.split_block(offset, n)? {
                out.entry(a)
                    .or_insert_with(|| SuperPoly::zero(self.nvars, offset))
                    .add_term(e.clone(), part);
            }
        }
        out.retain(|_, p| !p.is_zero());
        Ok(out)
    }

    pub fn to_f64(&self) -> SuperPoly<f64> {
        let mut out = SuperPoly::zero(self.nvars, self.level);
        for (e, c) in &self.terms {
            out.add_term(e.clone(), c.to_f64());
        }
        out
    }
}

impl<S: Scalar> fmt::Display for SuperPoly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (e, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})")?;
            for (j, k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*q{}", j + 1)?,
                    _ => write!(f, "*q{}^{k}", j + 1)?,
                }
            }
        }
        Ok(())
    }
}

impl<S: Scalar> fmt::Debug for SuperPoly<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "SuperPoly(vars={}, L={}; {})",
            self.nvars, self.level, self
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Q;

    fn q(n: i64) -> Q {
        Q::from_integer(n.into())
    }

    #[test]
    fn calculus_on_monomials() {
        let x = SuperPoly::<Q>::var(0, 1, 2);
        let p = x.pow(3);
        assert_eq!(p.derivative(0), x.pow(2).scale(&q(3)));
        let area = x.integrate_box(&[(q(0), q(2))]);
        assert_eq!(area, Grassmann::from_i64(2, 2));
    }

    #[test]
    fn ring_evaluation_matches_square() {
        let x = SuperPoly::<Q>::var(0, 1, 2);
        let p = x.pow(2);
        let arg = Grassmann::parse("1 + s[1,2]", 2).unwrap();
        let v = p.eval_ring(std::slice::from_ref(&arg), &arg);
        assert_eq!(v, Grassmann::parse("1 + 2*s[1,2]", 2).unwrap());
    }

    #[test]
    fn box_integral_two_dims() {
        let x = SuperPoly::<Q>::var(0, 2, 0);
        let y = SuperPoly::<Q>::var(1, 2, 0);
        let v = x.mul(&y).integrate_box(&[(q(0), q(1)), (q(0), q(1))]);
        assert_eq!(v.body(), Q::new(1.into(), 4.into()));
    }
}
