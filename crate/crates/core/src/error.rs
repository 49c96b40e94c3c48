use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("divergence: {0}")]
    Divergence(String),

    #[error("point {x:?} is within {limit} of the orthant boundary")]
    BoundaryProximity { x: Vec<f64>, limit: f64 },

    #[error("parity violation: odd entry {index:?} has magnitude {value:e}")]
    ParityViolation { index: Vec<usize>, value: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("point {x} lies outside the sample hull [{lo}, {hi}]")]
    OutOfHull { x: f64, lo: f64, hi: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for diagnostics raised by the numerics rather than by bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Overflow(_)
                | Error::Divergence(_)
                | Error::ParityViolation { .. }
                | Error::DegenerateFit(_)
                | Error::OutOfHull { .. }
        )
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
