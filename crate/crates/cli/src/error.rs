use ropex_core::CoreError;

/// Harness-level failures, mapped onto stable process exit codes:
/// configuration problems exit 2, schedule-condition violations exit 3,
/// oracle misbehavior exits 4, anything else 1.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("schedule condition violated: {0}")]
    Schedule(String),

    #[error("oracle misconfiguration: {0}")]
    Oracle(String),

    #[error("{0}")]
    Other(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Schedule(_) => 3,
            CliError::Oracle(_) => 4,
            CliError::Other(_) | CliError::Io { .. } => 1,
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        match err {
            CoreError::NonFiniteDirection { .. } | CoreError::NonFinite { .. } => {
                CliError::Oracle(err.to_string())
            }
            CoreError::ReferenceDidNotConverge { .. } => CliError::Other(err.to_string()),
            _ => CliError::Config(err.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
