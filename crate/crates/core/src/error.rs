use thiserror::Error;

use crate::lagrange::SolveTrace;

/// Errors raised by the library.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("invalid observable: {0}")]
    InvalidObservable(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("outside the domain: {0}")]
    Domain(String),

    #[error("no maximum entropy state: mean {mean} outside [{lower},{upper}]")]
    NoSolution { mean: f64, lower: f64, upper: f64 },

    #[error("no convergence after {iterations} iterations (last residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        trace: Box<SolveTrace>,
    },

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("dimension {n} exceeds the limit of {max} for this method")]
    SizeLimit { n: usize, max: usize },

    #[error("oracle failure: {0}")]
    Oracle(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}
