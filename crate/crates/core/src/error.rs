use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("unknown {kind} `{token}`")]
    Vocabulary { kind: &'static str, token: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("non-finite value in parameter group `{group}`")]
    Numerical { group: String },

    #[error(
        "line search failed on the first iteration (f0 = {f0:e}, directional derivative = {slope:e}, last step = {step:e})"
    )]
    LineSearch { f0: f64, slope: f64, step: f64 },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
