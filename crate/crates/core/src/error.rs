use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty corpus")]
    EmptyCorpus,

    #[error("no in-vocabulary tokens")]
    NoInVocabularyTokens,

    #[error("no bigrams")]
    NoBigrams,

    #[error("support violation: event has sample mass but no reference mass")]
    SupportViolation,

    #[error("distribution kinds differ")]
    KindMismatch,

    #[error("no common vocabulary")]
    NoCommonVocabulary,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("only {usable} usable benchmark entries, need {required} ({oov_count} words out of vocabulary)")]
    InsufficientCoverage {
        usable: usize,
        required: usize,
        oov_count: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("SVD did not converge")]
    SvdNonConvergence,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
