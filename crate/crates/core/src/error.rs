use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The operation was called with inconsistent or wrongly-typed inputs.
    #[error("usage error: {0}")]
    Usage(String),

    /// One or more squares carry no spectrogram energy.
    #[error("degenerate squares (no energy): {indices:?}")]
    DegenerateSquares { indices: Vec<usize> },

    /// The jet center has (numerically) vanishing modulus.
    #[error("singular jet center: |F(center)|^2 = {value:e} is below threshold {threshold:e}")]
    SingularCenter { value: f64, threshold: f64 },

    /// Every local alignment coefficient vanished.
    #[error("no phase information: all alignment coefficients vanish")]
    NoInformation,

    /// The request exceeds a hard computational limit.
    #[error("resource limit: {0}")]
    Resource(String),

    /// A checked mathematical invariant failed.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn parse(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            context: context.into(),
            message: message.into(),
        }
    }
}
