use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("dimension {0} is not supported by this operation")]
    UnsupportedDimension(usize),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("cone has empty interior")]
    EmptyInterior,

    #[error("support violation: {0}")]
    SupportViolation(String),

    #[error("containment check failed: {0}")]
    Containment(String),

    #[error("quadrature did not reach tolerance {tol:e} (error estimate {estimate:e})")]
    Quadrature { tol: f64, estimate: f64 },

    #[error("insufficient resolution: {0}")]
    Resolution(String),

    #[error("condition precheck failed: {0}")]
    Condition(String),

    #[error("{0}")]
    UnsupportedSpace(String),

    #[error("symbol returned a non-finite value at frequency {0:?}")]
    NonFinite(Vec<f64>),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
