use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("state is not normalized (norm {norm})")]
    NotNormalized { norm: f64 },

    #[error("non-finite entry in matrix")]
    NonFinite,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(
        "gates are simultaneously commuting and anti-commuting within tolerance {tol:.1e}: inputs are inconsistent"
    )]
    AmbiguousClass { tol: f64 },

    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("no counts recorded (c0 + c1 = 0)")]
    ZeroCounts,

    #[error("efficiency must lie in (0, 1], got {0}")]
    InvalidEta(f64),

    #[error("degenerate calibration sweep: {0}")]
    DegenerateSweep(String),

    #[error(
        "SDP did not converge after {iterations} iterations \
         (primal residual {primal_residual:.3e}, psd residual {psd_residual:.3e}, gap {gap:.3e})"
    )]
    NonConvergence { iterations: usize, primal_residual: f64, psd_residual: f64, gap: f64 },

    #[error("comb is invalid: probability {value} out of range")]
    InvalidComb { value: f64 },

    #[error("decomposition did not converge (residual {residual:.3e})")]
    DecompositionFailed { residual: f64 },

    #[error("pair {index} has no COMMUTE/ANTICOMMUTE label")]
    Unlabeled { index: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
