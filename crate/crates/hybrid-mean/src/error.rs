use thiserror::Error;

/// Crate-wide error type.
///
/// `Invalid` reports a parameter or invariant violation; the message names
/// the offending symbol and the constraint it broke. `Io` reports a
/// file-system or file-format failure (dataset ingestion, CSV output).
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Io(String),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub fn io(msg: impl Into<String>) -> Self {
        Error::Io(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
