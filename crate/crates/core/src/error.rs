use thiserror::Error;

/// Errors surfaced by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("matrix is not Hermitian within tolerance (max asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("eigensolver failed to converge after {0} sweeps")]
    EigNoConvergence(usize),

    #[error("SDP problem is infeasible: {0}")]
    Infeasible(String),

    #[error("basis closure failure, missing words: {0:?}")]
    ClosureFailure(Vec<String>),
}

pub type Result<T> = std::result::Result<T, Error>;
