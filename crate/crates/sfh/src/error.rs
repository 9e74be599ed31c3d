use std::path::PathBuf;

/// Process exit code for bad configuration or input data.
pub const EXIT_VALIDATION: i32 = 2;
/// Process exit code for a numerical failure during a run.
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },
    #[error("ingestion error in {file}: {message}")]
    Ingest { file: PathBuf, message: String },
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] sfh_core::Error),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Config { path: path.into(), message: message.into() }
    }

    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io { context: context.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        use sfh_core::Error as E;
        match self {
            CliError::Config { .. } | CliError::Ingest { .. } | CliError::Io { .. } => EXIT_VALIDATION,
            CliError::Core(E::Inversion { .. } | E::Pole { .. } | E::Numerical(_)) => EXIT_NUMERICAL,
            CliError::Core(_) => EXIT_VALIDATION,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
