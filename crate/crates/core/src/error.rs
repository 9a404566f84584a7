use thiserror::Error;

/// Errors raised by the operator, section and harness layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A degree or support cap would be exceeded; results are never truncated silently.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A quadrature did not settle within its refinement budget.
    #[error("accuracy: {0}")]
    Accuracy(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("usage: {0}")]
    Usage(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be finite, got {value}")))
    }
}
