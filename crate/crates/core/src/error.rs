use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: expected length {expected}, got {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("driver carries {available} modes but {needed} are required")]
    InsufficientModes { needed: usize, available: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error(
        "explicit Euler step {step:e} violates the stability gate step < 1/(2d^2) = {limit:e} at d = {d}"
    )]
    Stability { step: f64, limit: f64, d: usize },

    #[error("insufficient replications: {got} given, at least {needed} required")]
    InsufficientReplications { needed: usize, got: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("failed to parse {path}: {message}")]
    ConfigParse { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
