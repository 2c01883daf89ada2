//! Command-line front end for `gi-core`: single evaluations, optimizations, `N_tot`
//! sweeps, closed-form verification suites, and CSV/JSON/SVG emission.

pub mod emit;
pub mod run;
pub mod spec;
pub mod verify;

use thiserror::Error;

pub use run::run;
pub use spec::{parse_args, RunSpec};

#[derive(Debug, Error)]
pub enum CliError {
    /// Help or version text requested; not a failure.
    #[error("{0}")]
    Info(String),

    #[error("{0}")]
    Usage(String),

    #[error("{0}")]
    Numeric(String),

    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Info(_) => 0,
            CliError::Numeric(_) | CliError::Io(_) => 1,
            CliError::Usage(_) => 2,
        }
    }
}

impl From<gi_core::Error> for CliError {
    fn from(e: gi_core::Error) -> Self {
        CliError::Numeric(e.to_string())
    }
}
