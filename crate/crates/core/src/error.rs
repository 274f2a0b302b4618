use thiserror::Error;

/// Errors raised by the engine. The frontend maps these onto exit codes.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("mode mismatch: {0}")]
    ModeMismatch(String),
    #[error("configuration error: {0}")]
    Configuration(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("valuation of the zero series is undefined")]
    UndefinedValuation,
    #[error("division by zero")]
    DivisionByZero,
    #[error("usage error: {0}")]
    Usage(String),
    #[error("resource limit exceeded: {0}")]
    Resource(String),
}

pub type Result<T> = std::result::Result<T, Error>;
