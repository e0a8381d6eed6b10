use thiserror::Error;

use crate::arbitrage::ArbitrageLevel;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid date grid: {0}")]
    InvalidGrid(String),

    #[error("liability grid does not match the market grid")]
    GridMismatch,

    #[error("invalid tolerance policy: {0}")]
    InvalidTolerance(String),

    #[error("date {0} is not on the grid")]
    DateNotInGrid(f64),

    #[error("invalid instrument specification: {0}")]
    InvalidSpec(String),

    #[error("liability schedule is identically zero")]
    ZeroLiability,

    #[error("curve value at grid date {date} is not strictly positive ({value})")]
    NonPositiveCurve { date: f64, value: f64 },

    #[error("vertex enumeration supports at most {max} variables, got {got}")]
    TooManyVariables { max: usize, got: usize },

    #[error("super-replication is infeasible; obstruction vector {obstruction:?}")]
    InfeasibleLiability { obstruction: Vec<f64> },

    #[error("market admits arbitrage ({level:?}); least-cost super-replication is not well posed")]
    ArbitragePrecluded {
        level: ArbitrageLevel,
        portfolio: Option<Vec<f64>>,
    },

    #[error("super-replication cost is unbounded below along {ray:?}")]
    UnboundedBelow { ray: Vec<f64> },

    #[error("numerical breakdown: {0}")]
    Numerical(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
