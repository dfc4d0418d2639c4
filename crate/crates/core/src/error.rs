use thiserror::Error;

/// Errors surfaced by the numerical operations.
#[derive(Debug, Error)]
pub enum GlError {
    #[error("point ({0}, {1}) lies outside the tubular neighborhood (t0 = {2})")]
    OutOfChart(f64, f64, f64),
    #[error("normal offset t = {0} outside [0, {1}]")]
    TubularDomain(f64, f64),
    #[error("{what}: iteration limit {limit} reached (last value {last:e})")]
    IterationLimit { what: String, limit: usize, last: f64 },
    #[error("linear solve did not converge: {0} (residual {1:e})")]
    LinearSolve(String, f64),
    #[error("truncation cap T = {0} reached without energy stabilization (last change {1:e})")]
    Truncation(f64, f64),
    #[error("computed theta0 = {0} violates the bound (1/2, 1)")]
    Theta0Bound(f64),
    #[error("invalid problem setup: {0}")]
    Invalid(String),
    #[error("window at ({0}, {1}) with halfwidth {2} not admissible: {3}")]
    Window(f64, f64, f64, String),
    #[error("io failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv failure: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<V> = std::result::Result<V, GlError>;
