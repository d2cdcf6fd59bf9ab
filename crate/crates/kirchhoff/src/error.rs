use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64, last: Vec<f64> },
    #[error("step budget of {steps} exhausted at t = {t}")]
    StepBudget { t: f64, steps: usize, last: Vec<f64> },
    #[error("Newton iteration diverged; residual history {history:?}")]
    NewtonDiverged { history: Vec<f64> },
    #[error("quadrature did not converge (error estimate {estimate:e})")]
    Quadrature { estimate: f64 },
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("no sign change bracketed: {0}")]
    NoBracket(String),
    #[error("trajectory left the configured box at t = {t}")]
    Escape { t: f64 },
    #[error("itinerary targeting stopped after {realized} of {prescribed} symbols: {reason}")]
    Targeting { realized: usize, prescribed: usize, reason: String },
    #[error("synthesis identity residual {residual:e} exceeds {limit:e} ({what})")]
    Synthesis { what: String, residual: f64, limit: f64 },
    #[error("polar form is degenerate")]
    Degenerate,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("config file: {0}")]
    Toml(String),
}

pub type Result<T> = std::result::Result<T, Error>;
