//! Common interface for the two entry rings of supermatrices: Grassmann
//! numbers and Grassmann-coefficient polynomials.

use std::fmt::Debug;

use crate::algebra::{AlgebraError, Grassmann, Parity};
use crate::poly::SuperPoly;
use crate::scalar::Scalar;

pub trait SuperRing: Clone + PartialEq + Debug {
    type Scalar: Scalar;

    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn embed_grassmann(&self, g: &Grassmann<Self::Scalar>) -> Self;

    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;

    fn is_zero(&self) -> bool;
    fn parity(&self) -> Parity;

    /// Inverse of an even element whose body is invertible in this ring.
    fn try_inverse(&self) -> Result<Self, AlgebraError>;

    /// Pivot quality: `Some(|body|)` when the element is invertible.
    fn pivot_weight(&self) -> Option<f64>;

    /// Largest coefficient magnitude, used for tolerance checks.
    fn max_abs(&self) -> f64;
}

impl<S: Scalar> SuperRing for Grassmann<S> {
    type Scalar = S;

    fn zero_like(&self) -> Self {
        Grassmann::zero(self.level())
    }

    fn one_like(&self) -> Self {
        Grassmann::one(self.level())
    }

    fn embed_grassmann(&self, g: &Grassmann<S>) -> Self {
        g.lift(self.level())
    }

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn sub(&self, other: &Self) -> Self {
        self - other
    }

    fn mul(&self, other: &Self) -> Self {
        self * other
    }

    fn neg(&self) -> Self {
        -self
    }

    fn is_zero(&self) -> bool {
        Grassmann::is_zero(self)
    }

    fn parity(&self) -> Parity {
        Grassmann::parity(self)
    }

    fn try_inverse(&self) -> Result<Self, AlgebraError> {
        self.even_inverse()
    }

    fn pivot_weight(&self) -> Option<f64> {
        let b = self.body();
        if b.is_zero() || self.parity() != Parity::Even {
            None
        } else {
            Some(b.magnitude())
        }
    }

    fn max_abs(&self) -> f64 {
        Grassmann::max_abs(self)
    }
}

impl<S: Scalar> SuperRing for SuperPoly<S> {
    type Scalar = S;

    fn zero_like(&self) -> Self {
        SuperPoly::zero(self.nvars(), self.level())
    }

    fn one_like(&self) -> Self {
        SuperPoly::one(self.nvars(), self.level())
    }

    fn embed_grassmann(&self, g: &Grassmann<S>) -> Self {
        SuperPoly::constant(g.lift(self.level()), self.nvars())
    }

    fn add(&self, other: &Self) -> Self {
        SuperPoly::add(self, other)
    }

    fn sub(&self, other: &Self) -> Self {
        SuperPoly::sub(self, other)
    }

    fn mul(&self, other: &Self) -> Self {
        SuperPoly::mul(self, other)
    }

    fn neg(&self) -> Self {
        SuperPoly::neg(self)
    }

    fn is_zero(&self) -> bool {
        SuperPoly::is_zero(self)
    }

    fn parity(&self) -> Parity {
        SuperPoly::parity(self)
    }

    /// Works when the body polynomial is a nonzero constant; the remainder is
    /// then nilpotent and the Neumann sum terminates.
    fn try_inverse(&self) -> Result<Self, AlgebraError> {
        if SuperPoly::parity(self) != Parity::Even {
            return Err(AlgebraError::NotEven);
        }
        let b = match self.constant_body() {
            Some(b) => b,
            None => return Err(AlgebraError::NonConstantBody),
        };
        if b.is_zero() {
            return Err(AlgebraError::ZeroBody);
        }
        let inv_b = S::one() / b.clone();
        let one = self.one_like();
        let step = one.scale(&b).sub(self).scale(&inv_b);
        let mut term = one.clone();
        let mut sum = one;
        loop {
            term = term.mul(&step);
            if term.is_zero() {
                break;
            }
            sum = SuperPoly::add(&sum, &term);
        }
        Ok(sum.scale(&inv_b))
    }

    fn pivot_weight(&self) -> Option<f64> {
        match self.constant_body() {
            Some(b) if !b.is_zero() && SuperPoly::parity(self) == Parity::Even => {
                Some(b.magnitude())
            }
            _ => None,
        }
    }

    fn max_abs(&self) -> f64 {
        SuperPoly::max_abs(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Q;

    #[test]
    fn poly_inverse_with_constant_body() {
        let y = SuperPoly::<Q>::var(0, 1, 2);
        let nil = SuperPoly::constant(Grassmann::parse("s[1,2]", 2).unwrap(), 1);
        let p = SuperPoly::one(1, 2).add(&nil.mul(&y));
        let inv = p.try_inverse().unwrap();
        assert_eq!(p.mul(&inv), SuperPoly::one(1, 2));
        assert_eq!(y.try_inverse(), Err(AlgebraError::NonConstantBody));
    }
}
