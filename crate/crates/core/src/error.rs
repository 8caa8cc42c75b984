use thiserror::Error;

/// Errors raised while building or solving a pricing problem.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PricingError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParams { field: &'static str, reason: String },

    #[error(
        "condition1 violated: sigma = {sigma} must exceed sqrt(2/(pi*dt))*C_S = {threshold} \
         (modified variance would be {variance})"
    )]
    WellPosednessViolation {
        sigma: f64,
        threshold: f64,
        variance: f64,
    },

    #[error("invalid grid spec `{field}`: {reason}")]
    InvalidSpec { field: &'static str, reason: String },

    #[error("custom payoff has no values")]
    MissingPayoff,

    #[error("custom payoff has {got} values but the grid has {expected} nodes")]
    PayoffLength { expected: usize, got: usize },

    #[error("non-finite value at time step {step}, node {node} (explicit scheme unstable?)")]
    NonFiniteValue { step: usize, node: usize },

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
}

pub type Result<T> = std::result::Result<T, PricingError>;
