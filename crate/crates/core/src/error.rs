use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A numeric parameter (β, α, p, κ, ...) is outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Input values are outside the operator's domain (negative values where a
    /// nonnegative function is required, non-finite samples, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A geometric or structural precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Window enumeration would exceed the configured budget.
    #[error("enumeration budget exceeded: {count} windows requested, cap is {cap}")]
    Budget { count: u128, cap: u64 },

    /// An exhaustive oracle was asked to run on an input it cannot enumerate.
    #[error("size cap exceeded: {0}")]
    SizeCap(String),

    /// Malformed grid, cell-set or spec file.
    #[error("malformed input: {0}")]
    Format(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
