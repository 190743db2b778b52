use std::path::PathBuf;

use popsim::SimError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Sim(#[from] SimError),

    #[error("invalid experiment: {0}")]
    Spec(String),

    #[error("rows do not share one schema: {0}")]
    Schema(String),

    #[error("cannot write {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot encode output: {0}")]
    Encode(String),
}

impl CliError {
    /// Short machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Sim(e) => match e {
                SimError::InvalidPopulation(_) | SimError::InvalidParams { .. } => "params",
                SimError::Consistency(_) => "consistency",
                SimError::Unsupported { .. } => "unsupported",
                SimError::ConfigurationDomain { .. } => "configuration_domain",
                SimError::Capacity { .. } => "capacity",
                SimError::Divergence => "divergence",
                SimError::SolverResidual { .. } => "solver",
                SimError::Domain(_) => "domain",
            },
            CliError::Spec(_) => "spec",
            CliError::Schema(_) => "schema",
            CliError::Io { .. } => "io",
            CliError::Encode(_) => "encode",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Spec(_) => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
