use num_complex::Complex64;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input: bad configuration, out-of-range argument, unknown activation.
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("{what} exceeds capacity ({requested} > {limit})")]
    Capacity {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    #[error("activation overflowed at x = {x}")]
    Overflow { x: f64 },

    #[error("quadrature did not converge: relative change {change:.3e} after {points} points")]
    Quadrature { change: f64, points: usize },

    #[error("no Stieltjes root with positive imaginary part at z = {z}; roots: {roots:?}")]
    EdgeDegenerate { z: Complex64, roots: Vec<Complex64> },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invalid(_) | Error::Json(_) | Error::Capacity { .. } => 2,
            Error::Io(_) | Error::Csv(_) => 2,
            Error::Overflow { .. }
            | Error::Quadrature { .. }
            | Error::EdgeDegenerate { .. }
            | Error::Numerical(_) => 3,
        }
    }
}
