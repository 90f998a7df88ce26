use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot access {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },

    #[error("{}:{line}: malformed record: {message}", path.display())]
    Malformed {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },

    #[error("cannot build an index over an empty corpus")]
    EmptyCorpus,

    #[error("a query cannot mix passage clauses with document clauses")]
    MixedQuery,

    #[error("question analyzes to no query terms")]
    NoQuery,

    #[error("feature layout mismatch: model expects {expected}, got {found}")]
    LayoutMismatch { expected: String, found: String },

    #[error("candidate has no evidence passages")]
    NoEvidence,

    #[error("feature dimension `{0}` is not in the frozen layout")]
    UnknownDimension(String),

    #[error("training labels must contain both classes")]
    SingleClass,

    #[error("non-finite feature value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
