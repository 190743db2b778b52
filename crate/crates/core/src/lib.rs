//! Population protocol simulator for self-stabilizing ranking and leader
//! election, with adversarial initial configurations and an exact
//! small-population verifier.

pub mod adversary;
pub mod analysis;
pub mod engine;
pub mod error;
pub mod oracle;
pub mod params;
pub mod protocols;
pub mod rng;

pub use engine::{
    detect_correct, detect_silent, measure_convergence, pick_pair, run, step, Configuration, Protocol, RunMetrics,
    RunOptions, RunOutcome, Tally,
};
pub use error::{Result, SimError};
pub use params::Params;
pub use protocols::ProtocolKind;
pub use rng::{Randomness, RngStream};
