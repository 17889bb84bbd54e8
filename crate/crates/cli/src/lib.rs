//! Library side of the `chj` binary: configuration and command dispatch.

pub mod config;
pub mod run;

use std::fmt;

/// Exit status 1: bad input or a failed computation.
pub const EXIT_INVALID: i32 = 1;
/// Exit status 2: a checked property was violated.
pub const EXIT_VIOLATION: i32 = 2;

#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Core(chj_core::Error),
    /// The reader went away (e.g. `chj solve | head`).
    BrokenPipe,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Invalid(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::BrokenPipe => f.write_str("broken pipe"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<chj_core::Error> for CliError {
    fn from(e: chj_core::Error) -> Self {
        if let chj_core::Error::Io { kind: std::io::ErrorKind::BrokenPipe, .. } = e {
            return CliError::BrokenPipe;
        }
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        if e.kind() == std::io::ErrorKind::BrokenPipe {
            return CliError::BrokenPipe;
        }
        CliError::Invalid(e.to_string())
    }
}
