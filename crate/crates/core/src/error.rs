use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Hl0Error>;

#[derive(Debug, Error)]
pub enum Hl0Error {
    /// An input lies outside the domain of the operation. The message names the bound.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("point {0} lies inside the cluster element")]
    InsideCluster(num_complex::Complex64),

    #[error("degenerate disturbance: displacement is identically zero")]
    DegenerateDisturbance,

    #[error("index {index} out of range 1..={max}")]
    OutOfRange { index: usize, max: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("unsupported export: {0}")]
    Unsupported(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("I/O error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error at {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl Hl0Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Hl0Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Hl0Error::Io {
            path: path.into(),
            source,
        }
    }
}
