//! Transition functions and state types of the ranking protocols.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::params::Params;

pub mod cai;
pub mod linear_state;
pub mod linear_time;
pub mod log_time;
pub mod obs;
pub mod phase_clock;
pub mod reset;
pub mod roster;
pub mod synthetic_timer;

pub use cai::{cai_step, Cai, CaiState};
pub use linear_state::{linear_state_step, LinearState, LinearStateState, NextRank};
pub use linear_time::{linear_time_step, LinearTime, LinearTimeState};
pub use log_time::{log_time_step, LogTime, LogTimeState};
pub use obs::{obs_ssle_step, Obs, ObsState};
pub use phase_clock::{phase_clock_step, ClockAdvance, PhaseClockFields};
pub use reset::{propagate_reset_step, ResetFields, Resettable};
pub use roster::Roster;
pub use synthetic_timer::{synthetic_error_timer_step, SyntheticTimerFields};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    /// The n-state protocol, ranks in `0..n`.
    Cai,
    LinearTime,
    LinearState,
    LogTime,
    /// Three-agent leader election that admits no ranking.
    Obs,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 5] = [
        ProtocolKind::Cai,
        ProtocolKind::LinearTime,
        ProtocolKind::LinearState,
        ProtocolKind::LogTime,
        ProtocolKind::Obs,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            ProtocolKind::Cai => "cai",
            ProtocolKind::LinearTime => "linear_time",
            ProtocolKind::LinearState => "linear_state",
            ProtocolKind::LogTime => "log_time",
            ProtocolKind::Obs => "obs",
        }
    }

    /// Whether the protocol reaches a configuration with no applicable
    /// transition.
    pub fn is_silent(self) -> bool {
        !matches!(self, ProtocolKind::LogTime)
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ProtocolKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        ProtocolKind::ALL
            .into_iter()
            .find(|k| k.tag() == s)
            .ok_or_else(|| SimError::Domain(format!("unknown protocol `{s}`")))
    }
}

/// Number of states the protocol uses for the given parameters.
///
/// Silent-Linear-Time-SSR is reported from its closed-form count; Log-Time-SSR
/// has an unbounded state set.
pub fn count_states(kind: ProtocolKind, params: &Params) -> Result<BigUint> {
    let n = params.n as u64;
    let resetting = BigUint::from(params.r_max as u64 + params.d_max as u64 + 1);
    match kind {
        ProtocolKind::Cai => Ok(BigUint::from(n)),
        ProtocolKind::Obs => Ok(BigUint::from(6u32)),
        ProtocolKind::LinearState => {
            Ok(BigUint::from((2 * n - 1) + (4 * n + 1)) + resetting)
        }
        ProtocolKind::LinearTime => {
            let space = BigUint::from(params.name_space);
            let mut binom = BigUint::from(1u32);
            let mut subsets = BigUint::from(0u32);
            for i in 1..=n {
                binom = binom * (&space - BigUint::from(i - 1)) / BigUint::from(i);
                subsets += &binom;
            }
            Ok(BigUint::from(n) + BigUint::from(n) * space * subsets + resetting)
        }
        ProtocolKind::LogTime => Err(SimError::Unsupported {
            protocol: kind,
            op: "count_states",
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_round_trip() {
        for k in ProtocolKind::ALL {
            assert_eq!(k.tag().parse::<ProtocolKind>().unwrap(), k);
        }
        assert!("raft".parse::<ProtocolKind>().is_err());
    }

    #[test]
    fn state_counts() {
        let p7 = Params::new(7).unwrap();
        assert_eq!(count_states(ProtocolKind::Cai, &p7).unwrap(), BigUint::from(7u32));
        let p3 = Params::new(3).unwrap();
        assert_eq!(count_states(ProtocolKind::Obs, &p3).unwrap(), BigUint::from(6u32));
        let p10 = Params::new(10).unwrap();
        assert_eq!(p10.log_n, 3);
        assert_eq!(
            count_states(ProtocolKind::LinearState, &p10).unwrap(),
            BigUint::from(1465u32)
        );
        assert!(count_states(ProtocolKind::LogTime, &p10).is_err());
    }

    #[test]
    fn linear_time_count_small() {
        // n = 2, N = 4: 2 + 2*4*(C(4,1)+C(4,2)) + (r_max + d_max + 1)
        let p = Params::new(2).unwrap().with_name_space(4).unwrap();
        let expected = 2 + 2 * 4 * (4 + 6) + (60 + 408 + 1);
        assert_eq!(
            count_states(ProtocolKind::LinearTime, &p).unwrap(),
            BigUint::from(expected as u32)
        );
    }
}
