use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] kuramoto_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;

pub(crate) fn precondition(msg: impl Into<String>) -> HarnessError {
    HarnessError::PreconditionViolated(msg.into())
}
