use thiserror::Error;

/// Errors produced by the solvers, oracles and experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("numeric failure: {what} at {location}")]
    NumericFailure { what: String, location: String },

    #[error("inadmissible shock: u_l = {u_l} must exceed u_r = {u_r}")]
    InadmissibleShock { u_l: f64, u_r: f64 },

    #[error("characteristic solve failed at x = {x}, t = {t}")]
    CharacteristicSolve { x: f64, t: f64 },

    #[error("reference not converged: relative norm change {change:e} between resolutions")]
    ReferenceNotConverged { change: f64 },

    #[error("unstable step: Courant number {courant} exceeds {limit}")]
    UnstableStep { courant: f64, limit: f64 },

    #[error("run exceeded {0} time steps")]
    RunawayRun(usize),

    #[error("config parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config validation error: {0}")]
    Validation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

/// Returns a numeric-failure error when any value is not finite.
pub(crate) fn check_finite(values: &[f64], what: &str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        None => Ok(()),
        Some(i) => Err(Error::NumericFailure {
            what: what.to_string(),
            location: format!("index {i}"),
        }),
    }
}
