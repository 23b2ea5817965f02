//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by model construction, gap evaluation, sweeps, and I/O.
#[derive(Debug, Error)]
pub enum GapError {
    /// A representation was requested for a context with no points.
    #[error("context set is empty; representations require at least one point")]
    EmptyContext,

    /// An input carried a NaN or infinity where a finite value is required.
    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    /// A parameter violated its documented precondition.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The quadratic KL expansion is only valid for |eps_sigma| < sigma0 / 2.
    #[error(
        "quadratic KL expansion requires |eps_sigma| < sigma0/2: \
         got |{eps_sigma}| >= {sigma0}/2"
    )]
    QuadraticDomain { eps_sigma: f64, sigma0: f64 },

    /// The exact linear-decoder gap formula only applies to linear decoders.
    #[error("exact linear gap formula requires a constant-variance linear decoder")]
    NonLinearDecoder,

    /// A vector argument did not match the expected dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A rate fit was requested with too few usable points.
    #[error("insufficient data for rate fit: need at least {needed} usable n values, got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// Singularity-mode sweeps need at least one even context size in range.
    #[error("singularity mode needs an even context size in [{n_min}, {n_max}]")]
    NoEvenContextSizes { n_min: usize, n_max: usize },

    /// Configuration file or flag could not be resolved into a valid config.
    #[error("configuration error: {message}")]
    Config { message: String },

    /// A results CSV did not match the expected schema.
    #[error("CSV format error at line {line}: {message}")]
    CsvFormat { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl GapError {
    /// Whether this error is a usage/configuration problem (CLI exit code 2)
    /// rather than a domain error (exit code 1).
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            GapError::Config { .. } | GapError::CsvFormat { .. } | GapError::Json(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, GapError>;
