//! Front end for `fwexact`: JSON run configs, reports, matrix dumps and
//! sweep tables.

pub mod commands;
pub mod config;
pub mod report;

use fwexact::FwError;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_GAP: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Fw(#[from] FwError),
}

impl From<fwexact::dump::DumpError> for CliError {
    fn from(e: fwexact::dump::DumpError) -> Self {
        CliError::Io(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::Fw(e) if e.is_gap_violation() => EXIT_GAP,
            CliError::Fw(FwError::InvalidModel(_) | FwError::TruncationTooSmall { .. }) => EXIT_USAGE,
            CliError::Fw(_) => EXIT_INVARIANT,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            EXIT_USAGE => "usage",
            EXIT_IO => "io",
            EXIT_GAP => "spectral_gap",
            _ => "invariant",
        }
    }
}
