use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value at {location}")]
    NonFinite { location: String },

    #[error("invalid network at {path}: {reason}")]
    InvalidNetwork { path: String, reason: String },

    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("width cap exceeded: estimated width {estimate} > cap {cap}")]
    WidthCap { estimate: usize, cap: usize },

    #[error("target does not satisfy precondition: {0}")]
    Precondition(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
