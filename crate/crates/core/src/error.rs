//! Crate-wide error type and result alias.

use std::path::PathBuf;

use thiserror::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors produced by dataset handling, retrieval, translation, generation
/// and experiment orchestration.
#[derive(Debug, Error)]
pub enum Error {
    /// Input JSON could not be parsed.
    #[error("parse error in {path}: {message}")]
    Parse {
        /// File that failed to parse.
        path: PathBuf,
        /// Parser message, including line/column context.
        message: String,
    },

    /// A record is missing a mapped field or a field has the wrong type.
    #[error("schema error in record {record}: field `{field}` {message}")]
    Schema {
        /// Record id, or `#<index>` when the id itself is unavailable.
        record: String,
        /// The mapped field name that failed.
        field: String,
        /// What went wrong with the field.
        message: String,
    },

    /// An input record has no matching output.
    #[error("join error: record {record} has no output")]
    Join {
        /// Record id, or `#<index>` when the id itself is unavailable.
        record: String,
    },

    /// An operation was invoked outside its contract.
    #[error("usage error: {0}")]
    Usage(String),

    /// A translation chain spec is malformed.
    #[error("invalid translation chain `{spec}`: {message}")]
    Chain {
        /// The offending spec string.
        spec: String,
        /// Why it was rejected.
        message: String,
    },

    /// A single backend call (translate or generate) failed.
    #[error("backend error: {0}")]
    Backend(String),

    /// A round-trip translation failed at a specific hop.
    #[error("translation failed at hop {hop}: {message}")]
    Translation {
        /// Zero-based index of the failing hop pair.
        hop: usize,
        /// Backend message.
        message: String,
    },

    /// Text generation failed after the backend exhausted its retries.
    #[error("generation failed: {0}")]
    Generation(String),

    /// Invalid experiment configuration.
    #[error("config error: {0}")]
    Config(String),

    /// File I/O failure.
    #[error("io error on {path}: {source}")]
    Io {
        /// File that could not be read or written.
        path: PathBuf,
        /// Underlying I/O error.
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
