//! Library side of the `fockgen` command: configs, verification suites,
//! reports and table writers. The binary is a thin argument parser on top.

pub mod config;
pub mod report;
pub mod tables;
pub mod verify;

pub use config::RunConfig;
pub use verify::{cmd_verify, run_verify};

use fockgen::fock::DEFAULT_BUDGET;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAILURES: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;

pub const BUDGET_ENV: &str = "FOCKGEN_BUDGET";

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Capacity(String),
    Io(String),
    Runtime(fockgen::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "invalid configuration: {m}"),
            CliError::Capacity(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Runtime(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<fockgen::Error> for CliError {
    fn from(e: fockgen::Error) -> Self {
        use fockgen::Error as E;
        match e {
            E::Capacity { .. } => CliError::Capacity(e.to_string()),
            E::InvalidGrid(_) | E::Config(_) | E::Json(_) => CliError::Config(e.to_string()),
            other => CliError::Runtime(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Capacity(_) => EXIT_CAPACITY,
            CliError::Runtime(_) => EXIT_FAILURES,
        }
    }
}

/// Fock-dimension capacity, overridable through the environment.
pub fn budget() -> usize {
    std::env::var(BUDGET_ENV).ok().and_then(|v| v.trim().parse().ok()).unwrap_or(DEFAULT_BUDGET)
}
