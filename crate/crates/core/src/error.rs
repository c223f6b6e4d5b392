use thiserror::Error;

/// Errors raised by argument validation and numerical evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point {point} lies outside {domain}")]
    OutsideDomain { domain: String, point: String },

    #[error("monomial index {index} is not admissible on {domain}")]
    Inadmissible { domain: String, index: String },

    #[error("non-finite integrand value at node {point}")]
    NonFinite { point: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
