use thiserror::Error;

/// Errors produced by setups, instances and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("point outside the domain of the prox-function: {0}")]
    Domain(String),

    #[error("invalid feasible set: {0}")]
    InvalidSet(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("no Slater point found after {samples} interior samples")]
    NoSlaterPoint { samples: usize },

    #[error("constraint subgradient vanished at an infeasible point (g = {value}); the problem has no Slater point")]
    Infeasible { value: f64 },

    #[error("no productive steps after {iterations} iterations")]
    NoProductiveSteps { iterations: u64 },

    #[error("stochastic subgradient norm {norm} exceeds the declared almost-sure bound {bound}")]
    OracleBoundViolated { norm: f64, bound: f64 },

    #[error("oracle failure: {0}")]
    Oracle(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

pub(crate) fn check_finite(v: &[f64], what: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}
