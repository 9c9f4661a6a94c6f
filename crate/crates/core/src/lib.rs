pub mod block;
pub mod boson;
pub mod error;
pub mod genfun;
pub mod scalar;
pub mod spectrum;

pub use block::{Basis, BlockOp, ModelParams};
pub use boson::{Grade, GradedOp, NormalOp};
pub use error::{Error, Result};
pub use scalar::{Coeff, EpsScalar, Rational, Scalar};
