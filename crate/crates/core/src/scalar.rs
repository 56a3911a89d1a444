//! Scalar coefficient tower.
//!
//! Everything in the engine is generic over [`Scalar`]. Exact rationals
//! ([`BigRational`]) carry the algebraic identities with zero tolerance;
//! `f64` carries the quadrature paths.

use std::fmt::{Debug, Display};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, Signed, ToPrimitive, Zero};

/// Coefficient field used by Grassmann elements, polynomials and matrices.
pub trait Scalar:
    Num + Clone + Debug + Display + PartialOrd + std::ops::Neg<Output = Self> + Send + Sync + 'static
{
    /// `true` when arithmetic is exact (no rounding).
    const EXACT: bool;

    fn from_i64(v: i64) -> Self;

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }

    /// Conversion used for quadrature nodes and weights.
    fn from_f64(v: f64) -> Self;

    fn to_f64(&self) -> f64;

    fn magnitude(&self) -> f64 {
        self.to_f64().abs()
    }

    /// Parses integers, decimals and `p/q` fractions.
    fn parse_scalar(text: &str) -> Option<Self>;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_i64(v: i64) -> Self {
        v as f64
    }

    fn from_f64(v: f64) -> Self {
        v
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn parse_scalar(text: &str) -> Option<Self> {
        let text = text.trim();
        if let Some((n, d)) = text.split_once('/') {
            let n: f64 = n.trim().parse().ok()?;
            let d: f64 = d.trim().parse().ok()?;
            if d == 0.0 {
                return None;
            }
            return Some(n / d);
        }
        text.parse().ok()
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        BigRational::new(BigInt::from(num), BigInt::from(den))
    }

    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).unwrap_or_else(Zero::zero)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn magnitude(&self) -> f64 {
        Scalar::to_f64(&self.abs())
    }

    fn parse_scalar(text: &str) -> Option<Self> {
        let text = text.trim();
        if text.is_empty() {
            return None;
        }
        if let Some((n, d)) = text.split_once('/') {
            let n = parse_decimal(n.trim())?;
            let d = parse_decimal(d.trim())?;
            if d.is_zero() {
                return None;
            }
            return Some(n / d);
        }
        parse_decimal(text)
    }
}

fn parse_decimal(text: &str) -> Option<BigRational> {
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    if body.is_empty() {
        return None;
    }
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if !int_part.chars().all(|c| c.is_ascii_digit())
        || !frac_part.chars().all(|c| c.is_ascii_digit())
    {
        return None;
    }
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer = BigInt::parse_bytes(digits.as_bytes(), 10)?;
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    let value = BigRational::new(numer, denom);
    Some(if neg { -value } else { value })
}

/// `1/k!` as a scalar.
pub fn inv_factorial<S: Scalar>(k: u32) -> S {
    let mut f = S::one();
    for i in 2..=k {
        f = f * S::from_i64(i as i64);
    }
    S::one() / f
}

/// `base^exp` for non-negative integer exponents.
pub fn powi<S: Scalar>(base: &S, exp: u32) -> S {
    let mut acc = S::one();
    for _ in 0..exp {
        acc = acc * base.clone();
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rationals() {
        let half = BigRational::parse_scalar("1/2").unwrap();
        assert_eq!(half, BigRational::from_ratio(1, 2));
        assert_eq!(
            BigRational::parse_scalar("-0.25").unwrap(),
            BigRational::from_ratio(-1, 4)
        );
        assert_eq!(
            BigRational::parse_scalar("3").unwrap(),
            BigRational::from_i64(3)
        );
        assert!(BigRational::parse_scalar("1/0").is_none());
        assert!(BigRational::parse_scalar("abc").is_none());
        assert_eq!(f64::parse_scalar("1/4"), Some(0.25));
    }

    #[test]
    fn factorials() {
        assert_eq!(
            inv_factorial::<BigRational>(4),
            BigRational::from_ratio(1, 24)
        );
        assert_eq!(inv_factorial::<f64>(0), 1.0);
    }
}
