use std::path::PathBuf;

use thiserror::Error;

/// Exit codes: 0 success, 2 bad input or I/O, 3 numerical failure, 4 Inconclusive under `--strict`.
pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error(transparent)]
    Core(#[from] opderiv::Error),

    /// An emitted report failed its own schema check.
    #[error("emitted report is invalid: {0}")]
    Report(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io { .. } | CliError::Json { .. } | CliError::Csv { .. } => EXIT_INPUT,
            CliError::Core(opderiv::Error::Numerical(_) | opderiv::Error::NotBounded { .. }) => EXIT_NUMERICAL,
            CliError::Core(_) => EXIT_INPUT,
            CliError::Report(_) => EXIT_NUMERICAL,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
