use thiserror::Error;

/// Errors surfaced by the numerical routines.
///
/// `QuadratureInsufficient` is kept separate from `InvalidArgument` because
/// callers (the experiment runner in particular) map it to a distinct exit
/// code: a rule that cannot resolve the requested integrand is a resource
/// problem, not a caller bug.
#[derive(Debug, Error)]
pub enum FockError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature insufficient: {0}")]
    QuadratureInsufficient(String),

    #[error("measure mismatch: expected {expected}, got {got}")]
    MeasureMismatch { expected: String, got: String },

    #[error("space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("point outside trusted radius: |z| = {radius:.3} > {trusted:.3}")]
    OutsideTrustedRadius { radius: f64, trusted: f64 },

    #[error("eigensolver failed: {0}")]
    EigenFailure(String),

    #[error("serialization: {0}")]
    Serialization(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
