//! Command-line front end for the condensate growth engines.
//!
//! Subcommands: `grow` (mean-field growth curve), `ssa` (stochastic
//! trajectories), `validate` (oracle suites) and `sweep` (milestones over a
//! parameter grid). Every command that writes files also writes
//! `manifest.toml`, which can be fed back through `--config`.

pub mod args;
pub mod commands;
pub mod config;
pub mod output;
pub mod svg;

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, bad scenario, unknown suite. Exit code 2.
    Usage(String),
    /// A validation suite or check failed. Exit code 1.
    Validation(String),
    /// Solver, I/O or other runtime failure. Exit code 3.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    pub fn usage_list(problems: Vec<String>) -> Self {
        CliError::Usage(format!("invalid scenario:\n  {}", problems.join("\n  ")))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Validation(m) => write!(f, "validation failed: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<bec_kinetics::Error> for CliError {
    fn from(e: bec_kinetics::Error) -> Self {
        match e {
            bec_kinetics::Error::InvalidConfig(_) => CliError::Usage(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
