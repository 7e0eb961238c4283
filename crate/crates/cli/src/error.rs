use std::path::PathBuf;

use thiserror::Error;

/// Exit status for success.
pub const EXIT_OK: i32 = 0;
/// Exit status for configuration errors.
pub const EXIT_CONFIG: i32 = 1;
/// Exit status when a verification check fails.
pub const EXIT_VERIFY: i32 = 2;
/// Exit status when a required step runs out of states or time.
pub const EXIT_CAPACITY: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Core(#[from] logit_core::Error),

    #[error("{failed} of {total} checks failed (first: {first})")]
    Verification { failed: usize, total: usize, first: String },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use logit_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Io { .. } => EXIT_CONFIG,
            CliError::Core(E::Capacity { .. } | E::Horizon { .. }) => EXIT_CAPACITY,
            CliError::Core(E::InvalidParameters(_) | E::InvalidProfile(_)) => EXIT_CONFIG,
            CliError::Csv(_) | CliError::Core(_) | CliError::Verification { .. } => EXIT_VERIFY,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
