use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("line {line}: malformed JSON: {message}")]
    MalformedLine { line: usize, message: String },

    #[error("line {line}: missing key {key}")]
    MissingKey { line: usize, key: &'static str },

    #[error("duplicate docid {0:?}")]
    DuplicateDocId(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("external model: {0}")]
    External(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
