use std::io;
use std::path::PathBuf;

use thiserror::Error;

/// Errors that stop a command. Row-level problems in `estimate` are reported
/// and skipped instead.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Open { path: PathBuf, source: io::Error },

    #[error("cannot write {path}: {source}")]
    Create { path: PathBuf, source: io::Error },

    #[error("malformed header: expected `{expected}`, found `{found}`")]
    Header { expected: String, found: String },

    #[error("usage: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Core(#[from] smallsd::Error),
}
