//! Crate-wide error type.

use std::path::PathBuf;

/// Errors produced by evaluation, diagnostics, and experiment code.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A constructor argument is outside its stated range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// An operation was called outside its domain (e.g. a right derivative at 1).
    #[error("domain error: {0}")]
    Domain(String),

    /// An improper integral failed the truncation Cauchy test.
    #[error("integral diverges or converges too slowly: {0}")]
    Divergent(String),

    /// A numeric routine failed to converge or produced non-finite values.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// A stated precondition does not hold and was not overridden.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Text that could not be parsed (CSV ingestion, spec strings).
    #[error("parse error: {0}")]
    Parse(String),

    /// Filesystem failure, with the offending path.
    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A persisted report carries an unsupported schema version.
    #[error("report schema version mismatch: found {found}, expected {expected}")]
    SchemaVersion { found: u32, expected: u32 },

    /// JSON (de)serialization failure.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
