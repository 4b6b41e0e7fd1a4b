use std::path::PathBuf;

use kdlab_core::CoreError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: line {line}, column {column}: {message}")]
    Parse { path: PathBuf, line: usize, column: usize, message: String },

    #[error("{0}")]
    Invalid(String),

    #[error(transparent)]
    Core(#[from] CoreError),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 for infeasible problems, 3 for exhausted iteration budgets, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(CoreError::Infeasible) => 2,
            CliError::Core(CoreError::IterationLimit(_)) => 3,
            _ => 1,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
