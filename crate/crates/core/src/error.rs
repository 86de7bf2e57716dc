use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed map file: {0}")]
    MalformedMap(String),

    #[error("degenerate grid: {0}")]
    DegenerateGrid(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed csv at line {line}: {reason}")]
    Csv { line: usize, reason: String },

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("unsupported model version {found:?} (expected {expected:?})")]
    ModelVersion { found: String, expected: &'static str },

    #[error("SMO did not converge after {iterations} pair updates (KKT violation {violation:.3e})")]
    NotConverged { iterations: u64, violation: f64 },

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("empty {0}")]
    Empty(&'static str),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
