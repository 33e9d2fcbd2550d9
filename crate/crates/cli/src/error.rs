use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("bad overlay file {path}: {reason}")]
    BadOverlay { path: PathBuf, reason: String },
    #[error(transparent)]
    Core(#[from] cvf_core::Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// Process exit code: 2 for configuration problems, 3 for numerical
    /// failures, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        use cvf_core::Error as E;
        match self {
            CliError::Config(_) | CliError::BadOverlay { .. } => 2,
            CliError::Core(E::InvalidInput(_) | E::DuplicateGridPoint { .. } | E::Format(_)) => 2,
            CliError::Core(_) => 3,
            CliError::Io { .. } => 4,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
