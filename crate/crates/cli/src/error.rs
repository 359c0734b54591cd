use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] lcnorm::Error),

    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("{context}: {source}")]
    Json { context: String, source: serde_json::Error },

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for this failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(lcnorm::Error::NonConvergence { .. }) => 3,
            CliError::Core(lcnorm::Error::Counterexample { .. }) => 4,
            _ => 1,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
