use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config: {0}")]
    Config(String),
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: loolsm_core::Error,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, HarnessError>;

impl HarnessError {
    pub fn core(context: impl Into<String>, source: loolsm_core::Error) -> Self {
        HarnessError::Core { context: context.into(), source }
    }

    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }

    /// Process exit code: 2 for configuration errors, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        use loolsm_core::Error as E;
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Core { source, .. } => match source {
                E::NonFinite { .. }
                | E::Shape(_)
                | E::MissingIntercept { .. }
                | E::DegenerateRegression { .. }
                | E::ScheduleMismatch
                | E::ProvenanceMismatch => 3,
                _ => 2,
            },
            HarnessError::Io { .. } | HarnessError::Format { .. } => 1,
        }
    }
}
