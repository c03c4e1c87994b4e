use thiserror::Error;

/// Errors produced by the tensor, state, and analysis layers.
#[derive(Debug, Error)]
pub enum Error {
    /// Index extents do not line up for the requested operation.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// Invalid parameter for a constructor or model builder.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// A site, bond, or axis index is out of range.
    #[error("range error: {0}")]
    Range(String),

    /// Input outside the mathematical domain of a formula.
    #[error("domain error: {0}")]
    Domain(String),

    /// A dense representation would exceed the configured size cap.
    #[error("size error: {0}")]
    Size(String),

    /// Non-finite data or a failed factorization.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// Not enough data points for a fit or detector.
    #[error("data error: {0}")]
    Data(String),

    /// An evolution run exceeded its resource budget.
    #[error("resource error: {context} (reached beta = {beta_reached})")]
    Resource { context: String, beta_reached: f64 },

    /// Checkpoint or file I/O failure.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed checkpoint or result file.
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
