//! Error type with a stable exit-code mapping.
//!
//! The binary distinguishes three failure classes so scripts can react
//! without parsing messages: misconfiguration (2), numerical failure (3),
//! and a demo subcommand's built-in result assertion failing (4).

use std::fmt;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Clone)]
pub enum CliError {
    /// Bad flags, bad config file, out-of-domain parameters, or an
    /// unusable output location.
    Config(String),
    /// The computation itself failed: divergence, non-finite aggregates,
    /// or an iterative routine exhausting its budget.
    Numerical(String),
    /// A demo subcommand ran to completion but its built-in claim about
    /// the result did not hold.
    Assertion(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }
    pub fn numerical(msg: impl Into<String>) -> Self {
        CliError::Numerical(msg.into())
    }
    pub fn assertion(msg: impl Into<String>) -> Self {
        CliError::Assertion(msg.into())
    }

    /// Process exit code for this failure class (0 is success).
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Assertion(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Assertion(m) => write!(f, "result assertion failed: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<gdfactor_core::Error> for CliError {
    fn from(e: gdfactor_core::Error) -> Self {
        match e {
            gdfactor_core::Error::Overflow { .. } | gdfactor_core::Error::NumericalFailure(_) => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("i/o: {e}"))
    }
}
