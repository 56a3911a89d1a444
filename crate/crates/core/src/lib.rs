//! Symbolic-numeric superanalysis on finite-generator Grassmann algebras.
//!
//! The engine is generic over a [`Scalar`] coefficient field. Use the `Q`
//! aliases for exact identities and the `F` aliases for quadrature.

pub mod algebra;
pub mod berezin;
pub mod contour;
pub mod error;
pub mod poly;
pub mod quadrature;
pub mod random;
pub mod ring;
pub mod scalar;
pub mod supermatrix;
pub mod supersmooth;
pub mod verify;
pub mod vvintegral;

pub use algebra::{AlgebraError, Grassmann, IndexSet, Parity};
pub use error::{Error, Result};
pub use poly::SuperPoly;
pub use ring::SuperRing;
pub use scalar::Scalar;
pub use supermatrix::{
    even_det, sdet, sdet_formula_a, sdet_formula_b, sm_inverse, sm_mul, EvenSuperMatrix, Mat,
};

/// Exact rational scalars.
pub type Q = num_rational::BigRational;

pub type GrassmannQ = Grassmann<Q>;
pub type GrassmannF = Grassmann<f64>;
pub type SuperPolyQ = SuperPoly<Q>;
pub type SuperPolyF = SuperPoly<f64>;
