use thiserror::Error;

use crate::ode::SolverError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("negative input {value} for {what}")]
    NegativeInput { what: &'static str, value: f64 },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("interval [{a}, {b}] is reversed or outside [0, {horizon}]")]
    BadInterval { a: f64, b: f64, horizon: f64 },

    #[error("event at t = {t} lies outside [0, {horizon}]")]
    EventOutOfRange { t: f64, horizon: f64 },

    #[error("curve {k}: {source}")]
    CurveSolve {
        k: usize,
        #[source]
        source: SolverError,
    },

    #[error(transparent)]
    Solver(#[from] SolverError),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
