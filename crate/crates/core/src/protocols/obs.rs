//! A silent leader election protocol for three agents whose silent
//! configurations cannot be consistently ranked.
//!
//! States are a leader `l` and followers `f0..f4`. Equal states, and follower
//! pairs that are not neighbours on the 5-cycle, jump to a uniformly random
//! pair of states.

use serde::Serialize;

use crate::engine::{Protocol, Tally};
use crate::error::{Result, SimError};
use crate::params::Params;
use crate::protocols::ProtocolKind;
use crate::rng::Randomness;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum ObsState {
    Leader,
    Follower(u8),
}

impl ObsState {
    pub const ALL: [ObsState; 6] = [
        ObsState::Leader,
        ObsState::Follower(0),
        ObsState::Follower(1),
        ObsState::Follower(2),
        ObsState::Follower(3),
        ObsState::Follower(4),
    ];
}

/// Whether the pair is re-randomized when it meets.
pub fn obs_randomizes(a: ObsState, b: ObsState) -> bool {
    match (a, b) {
        _ if a == b => true,
        (ObsState::Follower(i), ObsState::Follower(j)) => {
            let d = (i as i32 - j as i32).unsigned_abs() % 5;
            d != 1 && d != 4
        }
        _ => false,
    }
}

pub fn obs_ssle_step(a: ObsState, b: ObsState, rand: &mut dyn Randomness) -> (ObsState, ObsState) {
    if obs_randomizes(a, b) {
        let code = rand.below(36) as usize;
        (ObsState::ALL[code / 6], ObsState::ALL[code % 6])
    } else {
        (a, b)
    }
}

#[derive(Debug, Clone)]
pub struct Obs {
    params: Params,
}

impl Obs {
    pub fn new(params: Params) -> Result<Self> {
        if params.n != 3 {
            return Err(SimError::Unsupported {
                protocol: ProtocolKind::Obs,
                op: "population sizes other than 3",
            });
        }
        params.validate()?;
        Ok(Self { params })
    }
}

impl Protocol for Obs {
    type State = ObsState;

    fn kind(&self) -> ProtocolKind {
        ProtocolKind::Obs
    }

    fn params(&self) -> &Params {
        &self.params
    }

    fn interact(&self, a: &mut ObsState, b: &mut ObsState, rand: &mut dyn Randomness) -> Result<u32> {
        (*a, *b) = obs_ssle_step(*a, *b, rand);
        Ok(0)
    }

    fn check_state(&self, s: &ObsState) -> Result<()> {
        match s {
            ObsState::Follower(i) if *i > 4 => Err(SimError::Consistency(format!("follower index {i} > 4"))),
            _ => Ok(()),
        }
    }

    fn slot(&self, s: &ObsState) -> Option<usize> {
        match s {
            ObsState::Leader => Some(0),
            ObsState::Follower(_) => None,
        }
    }

    /// Leader election only: exactly one leader.
    fn correct_from_tally(&self, tally: &Tally) -> bool {
        tally.count(0) == 1
    }

    fn locally_quiet(&self, _s: &ObsState) -> bool {
        true
    }

    fn is_silent(&self, config: &[ObsState]) -> Result<bool> {
        for (i, &a) in config.iter().enumerate() {
            for &b in &config[i + 1..] {
                if obs_randomizes(a, b) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}
