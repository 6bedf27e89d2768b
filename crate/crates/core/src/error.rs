use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// An argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A caller-side precondition (prime table coverage, range limits) was violated.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// A configuration that cannot be run (memory budget, modulus width).
    #[error("configuration error: {0}")]
    Config(String),
    /// A malformed file or string.
    #[error("parse error: {0}")]
    Parse(String),
    /// A checkpoint that does not match the scan it is resumed into.
    #[error("checkpoint mismatch: {0}")]
    Mismatch(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
