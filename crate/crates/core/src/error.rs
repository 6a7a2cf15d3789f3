use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("capacity exceeded: {what} supports N <= {max}, got N = {requested}")]
    Capacity {
        what: &'static str,
        max: usize,
        requested: usize,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("operator does not commute with the {symmetry} symmetry (defect {defect:.3e})")]
    SymmetryViolation { symmetry: &'static str, defect: f64 },

    #[error("matrix is not unitary (defect {defect:.3e})")]
    NonUnitary { defect: f64 },

    #[error("incomplete eigenbasis: captured weight {captured:.12} but expected {expected:.12}")]
    Completeness { captured: f64, expected: f64 },

    #[error("numerical consistency check failed: {0}")]
    Consistency(String),

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error("observer failed at step {step}: {message}")]
    Observer { step: u64, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_) | Error::Config(_) | Error::Unsupported(_) => 2,
            Error::Capacity { .. } => 3,
            Error::SymmetryViolation { .. }
            | Error::NonUnitary { .. }
            | Error::Completeness { .. }
            | Error::Consistency(_)
            | Error::Linalg(_) => 4,
            Error::DimensionMismatch { .. } | Error::Observer { .. } | Error::Io { .. } => 1,
        }
    }
}
