//! Command implementations behind the `kae` binary. Each command renders
//! its full output into a `String` so callers control where it goes.

pub mod commands;
pub mod config;

use std::fmt;

/// Any command failure, with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_CAP: u8 = 2;

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<kae_core::Error> for CliError {
    fn from(e: kae_core::Error) -> Self {
        CliError {
            code: if e.is_cap_exceeded() {
                EXIT_CAP
            } else {
                EXIT_USAGE
            },
            message: e.to_string(),
        }
    }
}
