use thiserror::Error;

use crate::algebra::AlgebraError;

/// Errors raised above the bare algebra layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("axis {axis} out of range 1..={max}")]
    AxisOutOfRange { axis: usize, max: usize },

    #[error("parity violation: {0}")]
    ParityViolation(String),

    #[error("both diagonal blocks have singular body; superdeterminant undefined")]
    BothBodiesSingular,

    #[error("body-singular matrix: {0}")]
    SingularBody(String),

    #[error("block formulas disagree (residual {residual:e})")]
    FormulaDisagreement { residual: f64 },

    #[error("point {point:?} lies outside the body domain")]
    OutsideDomain { point: Vec<f64> },

    #[error("oracle supplies derivatives to order {available}, continuation needs {needed}")]
    OracleOrder { needed: u32, available: u32 },

    #[error("operation needs polynomial coefficients: {0}")]
    NotPolynomial(String),

    #[error("generator budget exceeded: need level {needed}, maximum is {max}")]
    LevelExceeded { needed: u32, max: u32 },

    #[error("quadrature did not reach tolerance {tol:e} (estimated error {estimate:e})")]
    ToleranceNotMet { tol: f64, estimate: f64 },

    #[error("body of the super-Jacobian is singular at q = {q:?}")]
    BodySingular { q: Vec<f64> },

    #[error("orientation violated: body Jacobian determinant {det} <= 0 at {point:?}")]
    Orientation { point: Vec<f64>, det: f64 },

    #[error("path endpoints do not match: {0}")]
    EndpointMismatch(String),

    #[error("map is not monotone: {0}")]
    NotMonotone(String),

    #[error("supplied inverse does not invert the map: {0}")]
    InverseMismatch(String),

    #[error("antiderivative check failed: {0}")]
    NotAntiderivative(String),

    #[error("map is not a superdiffeomorphism: {0}")]
    NotSuperdiffeo(String),

    #[error("integration orders disagree (residual {residual:e})")]
    OrderInterchange { residual: f64 },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("{0}")]
    Precondition(String),
}

pub type Result<T> = std::result::Result<T, Error>;
