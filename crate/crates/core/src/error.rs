use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension for {what}: {value}")]
    InvalidDimension { what: &'static str, value: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),

    /// The Fisher matrix is singular or indefinite: some parameter is not
    /// observable from the current beamformer.
    #[error("singular Fisher information matrix (min eigenvalue {min_eigenvalue:e})")]
    SingularFim { min_eigenvalue: f64 },

    /// The proximal penalty does not dominate the linearized curvature, so
    /// the subproblem matrix is not positive definite.
    #[error("penalty too small: Q has eigenvalue {min_eigenvalue:e} at rho = {rho:e}")]
    PenaltyTooSmall { min_eigenvalue: f64, rho: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("insufficient data: need at least {needed} iterates, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("unsupported dimension: expected n_tx = {expected}, got {got}")]
    UnsupportedDimension { expected: usize, got: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error on {path}: {message}")]
    Serialization { path: PathBuf, message: String },
}
