use std::io;

use thiserror::Error;

/// Errors produced by the dithered-quantization library.
#[derive(Debug, Error)]
pub enum Error {
    /// An input value or sequence violates an operation's precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A parameter lies outside its mathematical domain.
    #[error("{name} = {value} is outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    /// A pipeline or quantizer configuration is not usable.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Malformed or unsupported file content.
    #[error("format error: {0}")]
    Format(String),

    /// A numeric procedure failed its own convergence check.
    #[error("numeric convergence failure: {0}")]
    Numeric(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_unit_interval(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            domain: "[0, 1]",
        })
    }
}
