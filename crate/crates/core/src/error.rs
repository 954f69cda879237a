use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("duplicate concept_id `{0}`")]
    DuplicateConcept(String),

    #[error("invalid document: {0}")]
    InvalidDocument(String),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("no grams survive min_df = {0}")]
    EmptyVocabulary(usize),

    #[error("empty evaluation set")]
    EmptyEvaluationSet,

    #[error("invalid k list: {0}")]
    InvalidKList(String),

    #[error("text mismatch for document {0}")]
    TextMismatch(usize),

    #[error("requested {requested} sentences but only {capacity} distinct citation variants exist")]
    CorpusCapacity { requested: usize, capacity: usize },

    #[error("invalid index file: {0}")]
    IndexFormat(String),

    #[error("unsupported index format version {found} (expected {expected})")]
    IndexVersion { found: u16, expected: u16 },

    #[error("backend construction failed: {0}")]
    Backend(String),

    #[error("benchmark error: {0}")]
    Bench(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<String>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
