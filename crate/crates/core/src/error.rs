use std::path::PathBuf;

/// Errors raised by the solver and diagnostics layers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("grid mismatch: operands live on different grids")]
    GridMismatch,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("CFL violation: max|u|*dt/dx = {courant:.4} exceeds {cfl_max}; suggested dt = {suggested_dt:.3e}")]
    Cfl {
        courant: f64,
        cfl_max: f64,
        suggested_dt: f64,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("partition of unity fails at |k| = {k_norm:.6}: sum = {sum:.16}")]
    Partition { k_norm: f64, sum: f64 },

    #[error("snapshot format error in {path:?}: {msg}")]
    Snapshot { path: PathBuf, msg: String },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
