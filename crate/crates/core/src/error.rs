use thiserror::Error;

use crate::instance::MetricViolation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("metric violation ({count} total), first: {first}")]
    Metric {
        first: MetricViolation,
        count: usize,
    },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("invalid solution: {0}")]
    InvalidSolution(String),

    #[error("instance too large for exhaustive search: {0}")]
    SizeGuard(String),

    /// A per-stage cost inequality failed. By construction this is a bug.
    #[error("certificate violated ({step}): {detail}")]
    Certificate { step: String, detail: String },

    /// Fewer than two bi-criteria locations; the reduction chain does not apply.
    #[error("degenerate instance: {0} aggregation location(s)")]
    Degenerate(usize),

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
}

impl Error {
    pub fn malformed(msg: impl Into<String>) -> Self {
        Error::Malformed(msg.into())
    }

    pub fn infeasible(msg: impl Into<String>) -> Self {
        Error::Infeasible(msg.into())
    }

    pub fn certificate(step: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Certificate {
            step: step.into(),
            detail: detail.into(),
        }
    }

    /// Process exit code used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Infeasible(_) => 2,
            Error::Certificate { .. } | Error::Internal(_) => 3,
            _ => 4,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
