use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numeric domain: {what} = {value} outside the admissible range")]
    NumericDomain { what: &'static str, value: f64 },

    #[error("no {eps}-midpoint between atoms {from} and {to}")]
    NoMidpoint { from: usize, to: usize, eps: f64 },

    #[error("product graph is disconnected: node {0} unreachable")]
    Disconnected(usize),

    #[error("eigensolver did not converge (residual {residual:e})")]
    Convergence { residual: f64 },

    #[error("transport solver failed: {0}")]
    Transport(String),

    #[error("vertex {0} is isolated; curvature undefined")]
    IsolatedVertex(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
