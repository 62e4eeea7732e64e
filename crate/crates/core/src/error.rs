use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("accuracy error: {0}")]
    Accuracy(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("integral diverges: {0}")]
    Divergent(String),
    #[error("underflow: {0}")]
    Underflow(String),
    #[error("insufficient scales: {0}")]
    InsufficientScales(String),
    #[error("invalid root system: {0}")]
    RootSystem(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

