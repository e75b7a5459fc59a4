use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {r} lies outside the domain [{lo}, {hi}]")]
    OutOfDomain { r: f64, lo: f64, hi: f64 },
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("integral diverges: {0}")]
    Divergent(String),
    #[error("solver did not converge: {0}")]
    NonConvergence(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
