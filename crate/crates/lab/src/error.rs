use std::path::PathBuf;

use crate::config::ConfigErrors;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("configuration errors:\n{0}")]
    Config(#[from] ConfigErrors),

    #[error("{context}: {source}")]
    Solver {
        context: String,
        #[source]
        source: ma_lab_core::Error,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Csv { path: PathBuf, message: String },

    #[error("{0}")]
    Usage(String),
}

impl LabError {
    /// Process exit code: 2 for configuration and usage errors, 3 for
    /// solver and I/O failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) | LabError::Usage(_) => 2,
            LabError::Solver { .. } | LabError::Io { .. } | LabError::Csv { .. } => 3,
        }
    }
}

/// Attach a short description of the failing step to a core error.
pub trait Context<T> {
    fn context(self, what: impl Into<String>) -> Result<T, LabError>;
}

impl<T> Context<T> for ma_lab_core::Result<T> {
    fn context(self, what: impl Into<String>) -> Result<T, LabError> {
        self.map_err(|source| LabError::Solver {
            context: what.into(),
            source,
        })
    }
}
