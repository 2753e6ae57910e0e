use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(String),

    #[error("precondition not met: {0}")]
    Precondition(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("eigensolver did not converge within {budget} iterations for eigenvalue #{index}")]
    Convergence { index: usize, budget: usize },

    #[error("time {t:e} is below the spectral validity threshold t_min = {t_min:e} (tail bound {tail:e} vs kernel {kernel:e})")]
    BelowTmin {
        t: f64,
        t_min: f64,
        tail: f64,
        kernel: f64,
    },

    #[error("division by zero: {0}")]
    ZeroNorm(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
