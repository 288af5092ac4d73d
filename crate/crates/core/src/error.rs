use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("score {0} is not a finite value in [0, 1]")]
    ScoreOutOfRange(f64),

    #[error("empty condition chain")]
    EmptyChain,

    #[error("unknown t-norm `{0}` (expected lukasiewicz, product, goedel or logproduct)")]
    UnknownTNorm(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: parse error: {message}")]
    Parse { context: String, message: String },

    /// A well-formed input that violates a domain rule. `entity` names the
    /// offending rule or case, `field` the offending attribute.
    #[error("{entity}: {field}: {message}")]
    Validation {
        entity: String,
        field: String,
        message: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Process exit status: 2 for malformed arguments, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::InvalidArgument(_) | Error::UnknownTNorm(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn validation(
        entity: impl Into<String>,
        field: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::Validation {
            entity: entity.into(),
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
