use thiserror::Error;

use crate::model::DickeBlock;

/// Errors produced anywhere in the library.
///
/// The variants map one-to-one onto the CLI exit codes: parameter and
/// configuration problems are "config" errors, while numerical and
/// truncation failures are reported separately.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("eigensolver failed to converge for block {block}: {reason}")]
    Numerical { block: DickeBlock, reason: String },

    #[error("truncation error: {0}")]
    Truncation(String),

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
