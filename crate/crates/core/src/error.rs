use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad parameters (out-of-range rolloff, `κ < 1`, non-increasing delays, ...).
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    /// Operation needs a sinc (infinite-support) waveform and got a finite one, or vice versa.
    #[error("waveform mode mismatch: {0}")]
    ModeMismatch(String),

    /// A noise covariance that must be positive definite is not; this only
    /// happens for degenerate waveform sets (identical pulses with equal delays).
    #[error("singular noise covariance: {0}; the correlation matrix is only positive semi-definite for this waveform set")]
    SingularNoiseCovariance(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Slope regression had too few usable points.
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = std::result::Result<T, Error>;
