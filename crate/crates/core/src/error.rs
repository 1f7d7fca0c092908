use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("singular symbol: entry {value:e} at (time mode {time}, space mode {space}) is below threshold {threshold:e}")]
    SingularSymbol {
        time: usize,
        space: usize,
        value: f64,
        threshold: f64,
    },

    #[error("dense materialization of dimension {dim} exceeds guard {guard}")]
    Size { dim: usize, guard: usize },

    #[error("preconditioner state: {0}")]
    State(String),

    #[error("solver diverged at iteration {iteration}")]
    Divergence { iteration: usize },
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
