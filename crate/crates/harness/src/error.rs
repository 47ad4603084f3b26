use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Core(#[from] reconfig_core::Error),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("oracle check failed: {0}")]
    Oracle(String),
}

impl HarnessError {
    /// Process exit code: 1 usage/config, 2 oracle failure, 3 solver trouble.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Io { .. } => 1,
            HarnessError::Oracle(_) => 2,
            HarnessError::Core(e) => match e {
                reconfig_core::Error::Config(_)
                | reconfig_core::Error::Domain(_)
                | reconfig_core::Error::Dimension(_) => 1,
                _ => 3,
            },
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
