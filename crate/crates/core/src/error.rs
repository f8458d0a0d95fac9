use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid level {level}: expected {expected}")]
    InvalidLevel { level: usize, expected: String },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("copy fusion is only available along dimension 0 (requested dimension {0})")]
    InvalidFusion(usize),
    #[error("singular tridiagonal system: zero pivot at row {0}")]
    SingularSystem(usize),
    #[error("too many workers: {workers} workers cannot split {available} indices along dimension {dim}")]
    TooManyWorkers { workers: usize, available: usize, dim: usize },
    #[error("worker {worker} failed: {reason}")]
    WorkerFailed { worker: usize, reason: String },
    #[error("corrupt file{}: {reason}", .class.map(|c| format!(" (class {c})")).unwrap_or_default())]
    CorruptFile { class: Option<usize>, reason: String },
    #[error("class {requested} is not available ({available} classes stored)")]
    MissingClass { requested: usize, available: usize },
    #[error("invalid error bound {0}: must be positive and finite")]
    InvalidBound(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// Stable identifier used in machine-readable diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::InvalidLevel { .. } => "InvalidLevel",
            Error::Shape(_) => "ShapeError",
            Error::InvalidFusion(_) => "InvalidFusion",
            Error::SingularSystem(_) => "SingularSystem",
            Error::TooManyWorkers { .. } => "TooManyWorkers",
            Error::WorkerFailed { .. } => "WorkerFailed",
            Error::CorruptFile { .. } => "CorruptFile",
            Error::MissingClass { .. } => "MissingClass",
            Error::InvalidBound(_) => "InvalidBound",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Io(_) => "Io",
        }
    }
}
