use std::path::PathBuf;

use thiserror::Error;

/// Exit status for success.
pub const EXIT_OK: u8 = 0;
/// Exit status for a failed verification or a numerical failure.
pub const EXIT_FAILED: u8 = 1;
/// Exit status for invalid input, configuration or filesystem errors.
pub const EXIT_INVALID: u8 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error(transparent)]
    Core(#[from] mlap_core::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn exit_code(&self) -> u8 {
        use mlap_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Io { .. } | CliError::Csv { .. } => EXIT_INVALID,
            CliError::Core(e) => match e {
                E::AdmissibilityViolation { .. }
                | E::NonPositiveK { .. }
                | E::InvalidGrading(_)
                | E::InvalidGrid(_)
                | E::GridMismatch(_)
                | E::InvalidWindow { .. }
                | E::InsufficientWindow { .. }
                | E::InvalidConfig(_) => EXIT_INVALID,
                _ => EXIT_FAILED,
            },
        }
    }
}
