use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the calibration pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("scan {index} at t={scan_t} has no pose with a matching timestamp (pose t={pose_t})")]
    Alignment { index: usize, scan_t: f64, pose_t: f64 },

    #[error("point cloud is empty")]
    EmptyCloud,

    #[error("non-finite value during {0}")]
    Computation(&'static str),

    #[error("optimization failed: {0}")]
    OptimizationFailed(String),

    #[error("time {t} outside trajectory [{first}, {last}]")]
    Extrapolation { t: f64, first: f64, last: f64 },

    #[error("unknown environment `{0}`")]
    UnknownEnvironment(String),

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("{path}:{line}: timestamps not increasing ({prev} then {next})")]
    Ordering { path: PathBuf, line: usize, prev: f64, next: f64 },

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
