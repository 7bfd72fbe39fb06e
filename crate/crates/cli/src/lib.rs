//! Command-line front end for the `schatten-core` experiments.
//!
//! Exit codes: 0 success, 2 bad configuration or unresolvable request,
//! 3 a diagnostic exceeded its threshold (the CSV is still written),
//! 4 numerical breakdown.

use std::ffi::OsString;
use std::fmt;

pub mod config;
pub mod output;
pub mod run;

pub use config::{command, Experiment, RunConfig, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_FLAGGED: i32 = 3;
pub const EXIT_BREAKDOWN: i32 = 4;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Core(schatten_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use schatten_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Core(E::DiagnosticViolation { .. }) => EXIT_FLAGGED,
            CliError::Core(E::NumericalBreakdown(_)) => EXIT_BREAKDOWN,
            CliError::Core(_) => EXIT_CONFIG,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Core(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for CliError {}

impl From<schatten_core::Error> for CliError {
    fn from(e: schatten_core::Error) -> Self {
        CliError::Core(e)
    }
}

/// Parses `args` (program name first), runs the experiment and returns the
/// process exit code.
pub fn main_with(args: impl IntoIterator<Item = OsString>) -> i32 {
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match run::dispatch(&matches) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("schatten-lab: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use schatten_core::Error as E;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), EXIT_CONFIG);
        assert_eq!(CliError::Core(E::Unresolvable("x".into())).exit_code(), EXIT_CONFIG);
        assert_eq!(CliError::Core(E::TooLarge { nodes: 2, cap: 1 }).exit_code(), EXIT_CONFIG);
        assert_eq!(CliError::Core(E::NumericalBreakdown("x".into())).exit_code(), EXIT_BREAKDOWN);
        let flagged = E::DiagnosticViolation { name: "t", value: 1.0, threshold: 0.5 };
        assert_eq!(CliError::Core(flagged).exit_code(), EXIT_FLAGGED);
    }
}
