use num_rational::BigRational;
use thiserror::Error;

/// Errors raised by the exact algebra, the generating-function layer and the
/// numeric spectrum routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("division by zero while evaluating {0}")]
    DivisionByZero(String),

    #[error("cannot parse rational from {0:?}")]
    ParseRational(String),

    #[error("coefficient {0} is still symbolic; substitute numeric parameters first")]
    SymbolicCoefficient(String),

    #[error("no catalogued symmetry operator for bias {eps}; supported values are 0, ±1/2, ±1")]
    CatalogMiss { eps: BigRational },

    #[error("singular parameter: {0}")]
    SingularParameter(String),

    #[error("input violates a required symmetry: {0}")]
    InconsistentInput(String),

    #[error("{what} out of range: {detail}")]
    OutOfRange { what: &'static str, detail: String },

    #[error("function basis exhausted for M = {m} with u-degree bound {bound}: no nontrivial solution found")]
    BoundExhausted { m: usize, bound: usize },

    #[error("exponential tail is not expressible through the parity grade: {0}")]
    RepresentationMiss(String),

    #[error("matrix is not symmetric (relative asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("truncation N = {n} is too small for ansatz degree {degree} (need N >= {min})")]
    TruncationTooSmall { n: usize, degree: usize, min: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
