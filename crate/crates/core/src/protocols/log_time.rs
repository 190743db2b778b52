//! Ranking in logarithmic time on top of the phase clock.
//!
//! Within a phase agents gossip `(rank, name)` pairs. On entering a new phase
//! an agent that collected exactly `n` pairs takes the position of its own pair
//! as its rank, then draws a fresh name. The state set is unbounded, so the
//! protocol never falls silent.

use serde::Serialize;

use crate::engine::Protocol;
use crate::error::{Result, SimError};
use crate::params::Params;
use crate::protocols::phase_clock::{phase_clock_step, PhaseClockFields};
use crate::protocols::roster::Roster;
use crate::protocols::ProtocolKind;
use crate::rng::Randomness;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LogTimeState {
    pub rank: u32,
    pub name: u64,
    pub roster: Roster<(u32, u64)>,
    pub clock: PhaseClockFields,
}

impl LogTimeState {
    pub fn fresh(rank: u32, name: u64, clock: PhaseClockFields) -> Self {
        Self {
            rank,
            name,
            roster: Roster::singleton((rank, name)),
            clock,
        }
    }

    /// Recompute the rank if the roster is complete, then rename.
    fn enter_phase(&mut self, params: &Params, rand: &mut dyn Randomness) {
        if self.roster.len() == params.n {
            // (rank, name) tuples order rank-major, both ascending
            self.rank = self.roster.position(&(self.rank, self.name)).min(params.n) as u32;
        }
        self.name = 1 + rand.below(params.name_space);
        self.roster = Roster::singleton((self.rank, self.name));
    }
}

pub fn log_time_step(
    a: &mut LogTimeState,
    b: &mut LogTimeState,
    params: &Params,
    rand: &mut dyn Randomness,
) {
    let advance = phase_clock_step(&mut a.clock, &mut b.clock, params);
    if advance.a {
        a.enter_phase(params, rand);
    }
    if advance.b {
        b.enter_phase(params, rand);
    }
    if a.clock.phase == b.clock.phase && a.roster != b.roster {
        let union = a.roster.union(&b.roster);
        a.roster = union.clone();
        b.roster = union;
    }
}

#[derive(Debug, Clone)]
pub struct LogTime {
    params: Params,
}

impl LogTime {
    pub fn new(params: Params) -> Result<Self> {
        params.validate()?;
        Ok(Self { params })
    }
}

impl Protocol for LogTime {
    type State = LogTimeState;

    fn kind(&self) -> ProtocolKind {
        ProtocolKind::LogTime
    }

    fn params(&self) -> &Params {
        &self.params
    }

    fn interact(&self, a: &mut LogTimeState, b: &mut LogTimeState, rand: &mut dyn Randomness) -> Result<u32> {
        log_time_step(a, b, &self.params, rand);
        Ok(0)
    }

    fn check_state(&self, s: &LogTimeState) -> Result<()> {
        let p = &self.params;
        let rank_ok = |r: u32| r >= 1 && r as usize <= p.n;
        let name_ok = |q: u64| q >= 1 && q <= p.name_space;
        if !rank_ok(s.rank) || !name_ok(s.name) {
            return Err(SimError::Consistency(format!("(rank, name) = ({}, {}) out of bounds", s.rank, s.name)));
        }
        if s.clock.countdown > p.c_max {
            return Err(SimError::Consistency(format!("countdown {} above c_max", s.clock.countdown)));
        }
        if !s.roster.iter().all(|&(r, q)| rank_ok(r) && name_ok(q)) {
            return Err(SimError::Consistency("roster entry out of bounds".into()));
        }
        Ok(())
    }

    fn slot(&self, s: &LogTimeState) -> Option<usize> {
        (s.rank as usize).checked_sub(1)
    }

    fn locally_quiet(&self, _s: &LogTimeState) -> bool {
        false
    }

    fn is_silent(&self, _config: &[LogTimeState]) -> Result<bool> {
        Err(SimError::Unsupported {
            protocol: ProtocolKind::LogTime,
            op: "detect_silent",
        })
    }
}
