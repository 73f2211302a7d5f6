use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed input: wrong shape, non-finite entries, bad parameters.
    #[error("invalid input: {0}")]
    Input(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// A matrix that must be (semi)definite has an eigenvalue outside the allowed range.
    #[error("{what}: eigenvalue {eigenvalue:e} violates positivity")]
    Domain { what: String, eigenvalue: f64 },

    /// Result not representable in double precision.
    #[error("range error: {0}")]
    Range(String),

    /// Linearly dependent columns during orthonormalization.
    #[error("degenerate column {column}: residual {residual:e} below tolerance")]
    Degenerate { column: usize, residual: f64 },

    #[error("no convergence after t = {t}: last estimates {previous} and {last}")]
    Convergence { t: f64, previous: f64, last: f64 },

    #[error("optimizer stopped after {iterations} iterations (gradient norm {gradient_norm:e}); last losses {last_losses:?}")]
    Optimization {
        iterations: usize,
        gradient_norm: f64,
        last_losses: Vec<f64>,
    },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn check_dim(expected: usize, actual: usize) -> Result<()> {
        if expected == actual {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, actual })
        }
    }
}
