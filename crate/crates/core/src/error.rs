use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GpsmError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("integer overflow computing {0}")]
    Overflow(&'static str),

    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("number of candidate pattern sets {l} exceeds the enumeration cap {cap}")]
    EnumerationCapExceeded { l: String, cap: u64 },

    #[error("unsupported modulation order {0} (supported: 2, 4)")]
    UnsupportedModulation(usize),

    #[error("channel Gram matrix is near singular (reciprocal condition number {rcond:e})")]
    NearSingularChannel { rcond: f64 },

    #[error("notification index {index} out of range (L = {l})")]
    IndexOutOfRange { index: u64, l: u64 },

    #[error("malformed notification block: expected {expected} vectors, got {got}")]
    MalformedBlock { expected: usize, got: usize },

    #[error("decoded notification index {decoded} is not a valid set index (L = {l})")]
    NotificationFailure { decoded: u64, l: u64 },

    #[error("target BER {target:e} is not bracketed by the curve")]
    NotBracketed { target: f64 },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

impl GpsmError {
    /// Whether the error comes from numerics (singular channels, unbracketed
    /// targets) rather than from bad configuration.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            GpsmError::NearSingularChannel { .. }
                | GpsmError::NotBracketed { .. }
                | GpsmError::Overflow(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, GpsmError>;
