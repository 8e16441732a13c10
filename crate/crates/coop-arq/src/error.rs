//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Bad configuration (malformed thresholds, unknown scenario, bad key).
    #[error("config error: {0}")]
    Config(String),

    /// A numerical routine failed to converge or lost too much precision.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// A bracketing or bisection search did not find a solution.
    #[error("search failure: {0}")]
    SearchFailure(String),

    /// An enumeration would exceed the complexity guard.
    #[error("complexity guard: {0}")]
    Complexity(String),

    /// I/O failure while writing scenario output.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
