use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("infeasible configuration: d = {d} exceeds M = {m} (constraint d <= M)")]
    InfeasibleConfig { m: usize, d: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("input is not orthonormal (deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },

    #[error("filter direction vanished for user {user}, stream {stream}")]
    ZeroDirection { user: usize, stream: usize },

    #[error("all channel gains are zero")]
    AllZeroGains,

    #[error("equivalent channel of user {user} is singular (sigma_min / sigma_max = {ratio:.3e})")]
    SingularEquivalentChannel { user: usize, ratio: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("unsupported schema version {found} in {path} (supported: {supported})")]
    SchemaVersion {
        path: PathBuf,
        found: u32,
        supported: u32,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Error::Format {
            path: path.into(),
            message: message.to_string(),
        }
    }
}
