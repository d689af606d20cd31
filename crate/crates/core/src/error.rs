use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input data or configuration violates an operation's precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// An internal invariant did not hold. Indicates a bug, not bad data.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
