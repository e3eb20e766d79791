//! Error type shared across the library.

use thiserror::Error;

/// Errors produced by zonotope algebra, noise optimization, and the
/// simulation harness.
#[derive(Debug, Error)]
pub enum Error {
    /// Operand shapes are incompatible.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A value that must be finite is NaN or infinite.
    #[error("non-finite input: {0}")]
    NonFinite(String),

    /// A parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Sensitivity does not land on the noise grid lattice.
    #[error(
        "sensitivity {sensitivity} is not a multiple of the grid step {step}; \
         nearest bin count that aligns is N = {suggested_bins}"
    )]
    MisalignedSensitivity {
        sensitivity: f64,
        step: f64,
        suggested_bins: u32,
    },

    /// A stored distribution violates its declared invariants.
    #[error("invalid noise distribution: {0}")]
    InvalidDistribution(String),

    /// The optimizer produced a non-finite loss.
    #[error("optimizer diverged: {0}")]
    Diverged(String),

    /// File or serialization failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed JSON input.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
