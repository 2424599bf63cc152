use crate::schedule::PolicyKind;

/// Errors surfaced by the solver library.
#[derive(Debug, thiserror::Error)]
pub enum CoreError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("nonfinite value in {context}")]
    NonFinite { context: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("policy {policy:?} requires {what}")]
    MissingConstant {
        policy: PolicyKind,
        what: &'static str,
    },

    #[error("policy {policy:?} is incompatible with the problem: {reason}")]
    IncompatiblePolicy { policy: PolicyKind, reason: String },

    #[error("feasible set is unbounded; supply an explicit radius before building a schedule")]
    RadiusUnavailable,

    #[error(
        "nonfinite search direction at iteration {iteration}; the oracle is likely misconfigured"
    )]
    NonFiniteDirection { iteration: usize },

    #[error("reference solver did not converge: residual {residual:.3e} after {iterations} iterations (tolerance {tolerance:.3e})")]
    ReferenceDidNotConverge {
        iterations: usize,
        residual: f64,
        tolerance: f64,
    },

    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, CoreError>;
