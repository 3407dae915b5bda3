//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("operator set is not unital: defect norm {defect:.3e} exceeds {tol:.3e}")]
    NotUnital { defect: f64, tol: f64 },

    #[error("not a density matrix: {reason} (residual {residual:.3e})")]
    NotDensity { reason: String, residual: f64 },

    #[error("state is not faithful: smallest eigenvalue {min_eig:.3e}")]
    StateNotFaithful { min_eig: f64 },

    #[error("state is not invariant: residual {residual:.3e}")]
    StateNotInvariant { residual: f64 },

    #[error("projection is not sub-harmonic: min eigenvalue of τ(p) − p is {min_eig:.3e}")]
    NotSubharmonic { min_eig: f64 },

    #[error("subalgebra is not modular-invariant: defect {defect:.3e}")]
    NotModularInvariant { defect: f64 },

    #[error("invariant state too ill-conditioned for modular data: condition number {cond:.3e}")]
    IllConditioned { cond: f64 },

    #[error("memory budget exceeded: total dimension {required} > cap {cap}")]
    BudgetExceeded { required: usize, cap: usize },

    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),

    #[error("json failure: {0}")]
    Json(#[from] serde_json::Error),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Eigensolver(e.to_string())
    }
}

impl Error {
    /// Process exit status for the CLI: 2 validation, 3 budget, 1 internal.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DimensionMismatch { .. }
            | Error::NotUnital { .. }
            | Error::NotDensity { .. }
            | Error::StateNotFaithful { .. }
            | Error::StateNotInvariant { .. }
            | Error::NotSubharmonic { .. }
            | Error::NotModularInvariant { .. }
            | Error::InvalidInput(_)
            | Error::Json(_) => 2,
            Error::BudgetExceeded { .. } => 3,
            _ => 1,
        }
    }
}
