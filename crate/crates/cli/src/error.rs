use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}: invalid JSON: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },

    #[error("{0}")]
    Serialize(#[from] serde_json::Error),

    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] relbelief::Error),

    /// A `--fail-on` condition was met; the outputs were still written.
    #[error("gate failed: {0}")]
    Gate(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use relbelief::Error as E;
        match self {
            CliError::Gate(_) => 1,
            CliError::Io { .. } | CliError::Json { .. } | CliError::Usage(_) => 2,
            CliError::Serialize(_) => 3,
            CliError::Core(e) => match e {
                E::Domain(_)
                | E::InsufficientData { .. }
                | E::Degenerate(_)
                | E::NoSolution(_)
                | E::Parse(_) => 2,
                E::Numeric(_) | E::Unstable(_) | E::Estimation(_) | E::Consistency(_) => 3,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
