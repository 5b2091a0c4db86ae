use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the positioning stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("regression design matrix is rank deficient (condition number {condition:.3e})")]
    RankDeficientDesign { condition: f64 },

    #[error("fitted rudder coefficient matrix is singular (det = {det:.3e})")]
    SingularModel { det: f64 },

    #[error("{what} = {value} is outside [{min}, {max}]")]
    RangeViolation {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("scaling denominator rho*A_R*u_R^2 = {0} is not positive")]
    DegenerateScale(f64),

    #[error("allocation matrix Z = T*V is singular (det = {det:.3e})")]
    SingularAllocation { det: f64 },

    #[error("simulation state became non-finite at t = {t} s")]
    NonFiniteState { t: f64 },

    #[error("ship left the bounding box at t = {t} s (x0 = {x0:.3}, y0 = {y0:.3})")]
    DivergedRun { t: f64, x0: f64, y0: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
