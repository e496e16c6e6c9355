use thiserror::Error;

use crate::jordan::AlgebraDescriptor;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("algebra mismatch: {left} vs {right}")]
    AlgebraMismatch {
        left: AlgebraDescriptor,
        right: AlgebraDescriptor,
    },
    #[error("unsupported operation: {0}")]
    Unsupported(String),
    #[error("usage error: {0}")]
    Usage(String),
    /// Input lies outside the domain of the operation (off the cone, non-tangent momentum, ...).
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numerical error: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
