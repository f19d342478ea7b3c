use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the rule engine.
///
/// The variants are grouped so that front ends can map them onto distinct
/// exit codes or HTTP statuses: I/O, schema mismatches, data parse failures,
/// configuration problems, and curation conflicts.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed JSON: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{context}: {source}")]
    Csv {
        context: String,
        #[source]
        source: csv::Error,
    },

    /// The schema file is well-formed but violates an invariant, or a data
    /// file does not line up with the schema.
    #[error("schema: {0}")]
    Schema(String),

    /// A data cell could not be interpreted.
    #[error("row {row}, column `{column}`: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    /// A rule left-hand side matched no training row, so confidence is undefined.
    #[error("no coverage: left-hand side matches no row")]
    NoCoverage,

    #[error("not found: {0}")]
    NotFound(String),

    /// Optimistic-concurrency failure: the caller edited a stale version.
    #[error("version conflict on {key}: expected {expected}, current {current}")]
    Conflict {
        key: String,
        expected: u64,
        current: u64,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }
}
