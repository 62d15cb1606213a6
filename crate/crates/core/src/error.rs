use std::path::PathBuf;

use thiserror::Error;

/// Coarse error classes, used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Usage,
    Ingestion,
    Solver,
}

impl ErrorCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCategory::Usage => "usage",
            ErrorCategory::Ingestion => "ingestion",
            ErrorCategory::Solver => "solver",
        }
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {reason}")]
    Unreadable { path: PathBuf, reason: String },
    #[error("ragged input: line {line} has {found} fields, expected {expected}")]
    Ragged {
        line: usize,
        found: usize,
        expected: usize,
    },
    #[error("too little usable data: {rows} rows x {cols} columns (need at least 2 x 2)")]
    TooSmall { rows: usize, cols: usize },
    #[error("input is empty")]
    Empty,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error(
        "eigensolver did not converge on a {dim}x{dim} matrix (max |a_ij| = {max_abs:e}, frobenius = {frobenius:e})"
    )]
    EigenFailure {
        dim: usize,
        max_abs: f64,
        frobenius: f64,
    },

    #[error("svd did not converge on a {rows}x{cols} matrix")]
    SvdFailure { rows: usize, cols: usize },

    #[error("solver failed at iteration {iteration}: {source}")]
    Solver {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Ingest(#[from] IngestError),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidParameter { .. } | Error::DimensionMismatch { .. } => ErrorCategory::Usage,
            Error::Ingest(_) | Error::Io { .. } | Error::Format(_) | Error::InvalidInput(_) => {
                ErrorCategory::Ingestion
            }
            Error::EigenFailure { .. } | Error::SvdFailure { .. } | Error::Solver { .. } => {
                ErrorCategory::Solver
            }
        }
    }

    pub fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
