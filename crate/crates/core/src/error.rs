use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A ray from the origin never left the set before the doubling cap.
    #[error("set appears unbounded along direction {direction:?}")]
    Unbounded { direction: Vec<f64> },

    #[error("origin is not an interior point of the set (max g_i(0) = {max_g})")]
    OriginNotInterior { max_g: f64 },

    /// The solver could not decide the problem; never silently mapped to feasible.
    #[error("solver returned an indeterminate status: {0}")]
    SolverIndeterminate(String),

    #[error("solver failure: {0}")]
    Solver(String),

    /// The solver claimed feasibility but the recovered certificate does not check out.
    #[error("certificate rejected: residual {residual:e}, min eigenvalue {min_eig:e}")]
    CertificateRejected { residual: f64, min_eig: f64 },

    #[error("polytope is empty")]
    EmptyPolytope,

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
