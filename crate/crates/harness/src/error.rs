use std::io;
use std::path::PathBuf;

use kdvgeo_core::IntegrateError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("config error at line {line}: {message}")]
    ConfigLine { line: usize, message: String },
    #[error(transparent)]
    Step(#[from] IntegrateError),
    #[error("study aborted at h = {h}: {source}")]
    StudyAbort {
        h: f64,
        #[source]
        source: Box<HarnessError>,
    },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl HarnessError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Self::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    /// Process exit code: 2 config error, 3 step failure, 4 study abort, 1 i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) | Self::ConfigLine { .. } => 2,
            Self::Step(_) => 3,
            Self::StudyAbort { .. } => 4,
            Self::Io { .. } => 1,
        }
    }
}
