use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("divergence: {0}")]
    Divergence(String),
    #[error("accuracy: {0}")]
    Accuracy(String),
    #[error("unsupported target: {0}")]
    Unsupported(String),
    #[error("rejection budget of {0} proposals exhausted")]
    RejectionBudget(u64),
    #[error("all importance weights underflowed")]
    DegenerateWeights,
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
