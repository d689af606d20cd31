use std::path::Path;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl CliError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError::Invalid(msg.into())
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.display().to_string(), source }
    }

    /// Process exit status: 2 for bad input or configuration, 3 for internal errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) | CliError::Io { .. } => 2,
            CliError::Invariant(_) => 3,
        }
    }
}

impl From<fts_bands::Error> for CliError {
    fn from(e: fts_bands::Error) -> Self {
        match e {
            fts_bands::Error::InvalidInput(m) => CliError::Invalid(m),
            fts_bands::Error::Invariant(m) => CliError::Invariant(m),
        }
    }
}
