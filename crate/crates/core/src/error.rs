use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("genus mismatch: {left} vs {right}")]
    GenusMismatch { left: usize, right: usize },

    /// A structural or algebraic claim failed to verify.
    #[error("verification failed: {0}")]
    Verification(String),

    /// Quadrature or series evaluation did not reach the requested accuracy.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// The computed period matrix has Im τ not positive definite.
    #[error("orientation error: {0}")]
    Orientation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("cache error: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
