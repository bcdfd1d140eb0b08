//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("product dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("matrix is not unitary: residual {residual:.3e} exceeds tolerance {tol:.1e}")]
    NotUnitary { residual: f64, tol: f64 },

    #[error("matrix is not Hermitian: residual {residual:.3e} exceeds tolerance {tol:.1e}")]
    NotHermitian { residual: f64, tol: f64 },

    #[error("state vector is not normalized: norm {norm}")]
    NotNormalized { norm: f64 },

    #[error("non-finite entry at flat index {index}")]
    NonFinite { index: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    /// Whether this error is the caller's fault (bad input, bad config,
    /// unreadable file) as opposed to an internal failure. Drives the CLI
    /// exit code: invalid input maps to 2, everything else to 1.
    pub fn is_invalid_input(&self) -> bool {
        !matches!(self, Error::Internal(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
