use thiserror::Error;

use crate::protocols::ProtocolKind;

pub type Result<T, E = SimError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid population size {0}: at least 2 agents are required")]
    InvalidPopulation(usize),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParams { name: &'static str, reason: String },

    #[error("internal consistency violated: {0}")]
    Consistency(String),

    #[error("operation `{op}` is not supported for protocol {protocol}")]
    Unsupported { protocol: ProtocolKind, op: &'static str },

    #[error("initial configuration `{kind}` is not available for protocol {protocol}: {reason}")]
    ConfigurationDomain {
        kind: String,
        protocol: ProtocolKind,
        reason: String,
    },

    #[error("configuration graph needs {count} configurations, over the budget of {budget}")]
    Capacity { count: u128, budget: u128 },

    #[error("target set is not reached with probability 1 from the start configuration")]
    Divergence,

    #[error("linear solve did not converge: residual {residual:e}")]
    SolverResidual { residual: f64 },

    #[error("domain error: {0}")]
    Domain(String),
}
