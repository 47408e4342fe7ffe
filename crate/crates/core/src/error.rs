use thiserror::Error;

/// Failure modes of the numerical pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("integration failed at L = {at:.6e} m: {reason}")]
    Integration { at: f64, reason: String },
    #[error("matrix exponential failed: {0}")]
    MatrixExp(String),
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("reconstruction residual {residual:.3e} exceeds {limit:.1e}")]
    Reconstruction { residual: f64, limit: f64 },
    #[error("degeneracy detection failed: {0}")]
    Degeneracy(String),
    #[error("matrix is not symmetric (residual {0:.3e})")]
    NotSymmetric(f64),
    #[error("matrix is not unitary (residual {0:.3e})")]
    NotUnitary(f64),
    #[error("fit failed: {0}")]
    Fit(String),
    #[error("lattice mismatch: {0}")]
    LatticeMismatch(String),
    #[error("phase provenance mismatch: {0}")]
    PhaseMismatch(String),
    #[error("degenerate fringe: {0}")]
    DegenerateFringe(String),
    #[error("unphysical moments for mode {mode}: {detail}")]
    Physicality { mode: usize, detail: String },
    #[error("truncation error: {0}")]
    Truncation(String),
    #[error("phase unwrapping failed: {0}")]
    Unwrap(String),
    #[error("malformed container: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Numeric,
    Fit,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Domain(_) | Error::Io(_) | Error::Json(_) | Error::Format(_) => ErrorClass::Config,
            Error::Fit(_) | Error::Unwrap(_) => ErrorClass::Fit,
            _ => ErrorClass::Numeric,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
