use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("order {order} < 0 applied to a field with a nonzero zero mode")]
    NegativeOrderOnZeroMode { order: f64 },

    #[error("vector field is not divergence free (relative residual {residual:e})")]
    NotDivergenceFree { residual: f64 },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("forcing trace is empty")]
    EmptyTrace,

    #[error("time step {dt:e} violates the CFL limit {limit:e}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("non-finite state detected at t = {t}")]
    NonFinite { t: f64 },

    #[error("comparison bound undefined at t = {t}: bracket {bracket:e} <= 0")]
    BeyondComparisonHorizon { t: f64, bracket: f64 },

    #[error("ODE solution blows up: reached t = {reached}, estimated blow-up time {estimate}")]
    OdeBlowUp { reached: f64, estimate: f64 },

    #[error("no positive existence time: {0}")]
    NoExistenceTime(String),

    #[error("series too short for finite differences: {len} samples")]
    SeriesTooShort { len: usize },

    #[error("snapshot format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
