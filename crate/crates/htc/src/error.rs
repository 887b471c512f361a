use thiserror::Error;

/// Errors surfaced by the HTC engine.
#[derive(Debug, Error)]
pub enum HtcError {
    /// A model or truncation parameter failed validation.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A basis catalog would exceed the configured hard cap.
    #[error("catalog size {size} exceeds hard cap {cap} (total_quanta={total_quanta}, spectators={spectators})")]
    CatalogTooLarge {
        size: usize,
        cap: usize,
        total_quanta: u32,
        spectators: u32,
    },

    /// Catalog and matrix (or catalogs from different enumerations) do not match.
    #[error("catalog mismatch: {0}")]
    CatalogMismatch(String),

    /// The iterative eigensolver did not converge.
    #[error("eigensolver failed to converge after {iterations} iterations (dim {dim})")]
    EigenNoConvergence { dim: usize, iterations: usize },

    /// A numerical invariant was violated while building an observable.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A bracketing root search found no sign change.
    #[error("no sign change in bracket [{lo}, {hi}]: {detail}")]
    NoBracket { lo: f64, hi: f64, detail: String },

    /// An operation received an empty or out-of-range request.
    #[error("{0}")]
    BadRequest(String),
}

pub type Result<T> = std::result::Result<T, HtcError>;
