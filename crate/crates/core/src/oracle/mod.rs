//! Exact analysis of tiny populations: the full configuration graph, its
//! terminal components, hitting times, and the barrier invariant of the
//! n-state protocol.

pub mod barrier;
pub mod branches;
pub mod graph;
pub mod hitting;
pub mod states;

pub use barrier::{barrier_rank, check_barrier_preserved, is_barrier, rank_counts};
pub use branches::for_each_branch;
pub use graph::{
    build_config_graph, multiset_count, verify_self_stabilizing, ConfigGraph, Counterexample, VerificationReport,
    DEFAULT_BUDGET,
};
pub use hitting::{expected_hitting_time, Target};
pub use states::Enumerable;
