use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("grid index {index} out of range 0..{points}")]
    IndexOutOfRange { index: i64, points: usize },

    #[error("shape mismatch: expected {expected} values, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("unsupported model: {0}")]
    UnsupportedModel(String),

    #[error("eigenvalue {index} did not converge within {iterations} QL iterations")]
    NoConvergence { index: usize, iterations: usize },

    #[error("mode frequency is not positive (omega^2 = {omega_squared})")]
    MasslessMode { omega_squared: f64 },

    #[error("degenerate series: {0}")]
    DegenerateSeries(String),

    #[error("stream {stream} has {available} samples after burn-in, at least {required} needed")]
    InsufficientData {
        stream: usize,
        available: usize,
        required: usize,
    },

    #[error("enumeration needs {terms:.3e} configurations, budget is {budget}")]
    EnumerationBudget { terms: f64, budget: u64 },

    #[error("invalid path configuration: {0}")]
    InvalidConfiguration(String),
}

impl Error {
    pub(crate) fn param(name: &str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
