use std::path::PathBuf;

use crate::agd::TrajectoryRecord;

/// Errors produced by the factorization library and experiment harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("dimension mismatch in {op}: {lhs:?} vs {rhs:?}")]
    DimensionMismatch {
        op: &'static str,
        lhs: (usize, usize),
        rhs: (usize, usize),
    },

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("infeasible parameters: {0}")]
    Infeasible(String),

    #[error("rank detection failed: {0}")]
    RankDetection(String),

    #[error("target is trivial: epsilon = {epsilon} is not below 2 f0 = {}", 2.0 * f0)]
    TrivialTarget { epsilon: f64, f0: f64 },

    #[error("out of regime: {0}")]
    OutOfRegime(String),

    #[error("iterates diverged (non-finite) at iteration {iteration}")]
    Divergence { iteration: usize },

    /// A fatal-mode monitor fired; carries the trajectory up to that point.
    #[error("invariant violation: {}", .0.violations.first().map(|v| v.to_string()).unwrap_or_default())]
    MonitorViolation(Box<TrajectoryRecord>),

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error on {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Divergence { .. } | Error::NonFinite(_) => 3,
            Error::MonitorViolation(_) => 4,
            Error::Io { .. } | Error::Csv { .. } => 5,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
