use thiserror::Error;

/// Errors raised by the simulation library.
///
/// Every variant maps onto one of two process exit codes: parameter and
/// configuration problems are validation errors (2), everything that goes
/// wrong while computing is a numerical error (3).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("query at rescaled time {requested} is beyond the trajectory horizon {horizon}")]
    Horizon { requested: f64, horizon: f64 },

    #[error("value {value} outside the supported range [{lo}, {hi}]")]
    Range { value: f64, lo: f64, hi: f64 },

    #[error("cascade depth {have} too shallow for u = {u}; need at least {need} marks")]
    Depth { have: usize, need: usize, u: f64 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Config(_) | Error::Unsupported(_) => 2,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
