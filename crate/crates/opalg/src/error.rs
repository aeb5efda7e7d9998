use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("basis is linearly dependent (Gram eigenvalue {min_eig:.3e} below threshold)")]
    DependentBasis { min_eig: f64 },

    #[error("element lies outside the domain span (residual {residual:.3e})")]
    OutsideDomain { residual: f64 },

    #[error("size cap exceeded: level {level} on ambient dimension {ambient} gives {size}x{size} > {cap}x{cap}")]
    SizeCap { level: usize, ambient: usize, size: usize, cap: usize },

    #[error("map is not idempotent (residual {residual:.3e})")]
    NotIdempotent { residual: f64 },

    #[error("certificate invalid at {path}: {reason}")]
    Certificate { path: String, reason: String },

    #[error("unknown example '{0}'")]
    UnknownExample(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("iteration did not converge: {0}")]
    NoConvergence(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
