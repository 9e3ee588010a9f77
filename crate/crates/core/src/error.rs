use std::path::PathBuf;

use thiserror::Error;

use crate::idt::NodePath;

/// Errors surfaced by the engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}:{line}: {message}")]
    Record {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("corpus is empty after filtering")]
    EmptyCorpus,

    #[error("timestamp {0:?} is not ISO-8601")]
    Timestamp(String),

    #[error("invalid hyper-parameters: {0}")]
    Params(String),

    #[error("time {0} is outside [0, 1]")]
    TimeDomain(f64),

    #[error("path {0} does not address a live node")]
    DeadPath(NodePath),

    #[error("tree audit failed at {path}: {message}")]
    Audit { path: NodePath, message: String },

    #[error("unknown document {0:?}")]
    UnknownDocument(String),

    #[error("checkpoint does not match corpus: {0}")]
    Checkpoint(String),

    #[error("synthetic spec: {0}")]
    Synthetic(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
    let path = path.into();
    move |source| Error::Io { path, source }
}
