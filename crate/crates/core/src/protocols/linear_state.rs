//! Silent ranking with O(n) states.
//!
//! Settled agents remember whether the rank above theirs is occupied. A rank
//! collision unsettles the responder, which then waits for a Settled agent
//! whose next rank is empty. Unsettled agents that wait too long (the error
//! timer) trigger the shared reset, whose routine puts everyone at rank 1.

use serde::Serialize;

use crate::engine::Protocol;
use crate::error::{Result, SimError};
use crate::params::Params;
use crate::protocols::reset::{propagate_reset_step, ResetFields, Resettable};
use crate::protocols::ProtocolKind;
use crate::rng::Randomness;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum NextRank {
    Empty,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum LinearStateState {
    Settled { rank: u32, nextrank: NextRank },
    Unsettled { errorcount: u32 },
    Resetting(ResetFields),
}

impl LinearStateState {
    pub fn settled(rank: u32, nextrank: NextRank) -> Self {
        LinearStateState::Settled { rank, nextrank }
    }

    pub fn is_empty_settled(&self) -> bool {
        matches!(self, LinearStateState::Settled { nextrank: NextRank::Empty, .. })
    }
}

impl Resettable for LinearStateState {
    fn reset_fields(&self) -> Option<&ResetFields> {
        match self {
            LinearStateState::Resetting(f) => Some(f),
            _ => None,
        }
    }

    fn reset_fields_mut(&mut self) -> Option<&mut ResetFields> {
        match self {
            LinearStateState::Resetting(f) => Some(f),
            _ => None,
        }
    }

    fn become_resetting(&mut self, fields: ResetFields) {
        *self = LinearStateState::Resetting(fields);
    }
}

pub fn reset_linear_state(state: &mut LinearStateState) {
    *state = LinearStateState::settled(1, NextRank::Empty);
}

/// Randomized error timer of an Unsettled agent. Returns whether it fired.
fn error_timer(state: &mut LinearStateState, params: &Params, rand: &mut dyn Randomness) -> bool {
    let LinearStateState::Unsettled { errorcount } = state else {
        return false;
    };
    if rand.chance(params.coin_bias) {
        *errorcount = errorcount.saturating_sub(1);
    }
    if *errorcount == 0 {
        *state = LinearStateState::Resetting(ResetFields::triggered(params));
        return true;
    }
    false
}

/// Unsettled `u` takes the rank above Settled-Empty `s`.
fn settle_above(u: &mut LinearStateState, s: &mut LinearStateState, n: usize) -> bool {
    let (LinearStateState::Unsettled { .. }, LinearStateState::Settled { rank, nextrank }) = (&*u, &mut *s) else {
        return false;
    };
    if *nextrank != NextRank::Empty {
        return false;
    }
    let new_rank = *rank + 1;
    *nextrank = NextRank::Full;
    *u = LinearStateState::settled(
        new_rank,
        if (new_rank as usize) < n { NextRank::Empty } else { NextRank::Full },
    );
    true
}

/// One interaction of initiator `a` with responder `b`; returns the number of
/// agents that became triggered.
pub fn linear_state_step(
    a: &mut LinearStateState,
    b: &mut LinearStateState,
    params: &Params,
    rand: &mut dyn Randomness,
) -> Result<u32> {
    use LinearStateState::*;
    let n = params.n;

    if let (Settled { rank: ra, nextrank: na }, Settled { rank: rb, nextrank: nb }) = (&mut *a, &mut *b) {
        if *ra < *rb {
            *na = NextRank::Full;
        } else if *rb < *ra {
            *nb = NextRank::Full;
        }
        if *ra == *rb {
            *b = Unsettled {
                errorcount: params.error_init,
            };
        }
    }

    if !settle_above(a, b, n) {
        settle_above(b, a, n);
    }

    let mut triggered = 0;
    triggered += error_timer(a, params, rand) as u32;
    triggered += error_timer(b, params, rand) as u32;

    let mut reset = |s: &mut LinearStateState, _: &mut dyn Randomness| reset_linear_state(s);
    if a.is_resetting() {
        propagate_reset_step(a, b, params, &mut reset, rand)?;
    } else if b.is_resetting() {
        propagate_reset_step(b, a, params, &mut reset, rand)?;
    }
    Ok(triggered)
}

#[derive(Debug, Clone)]
pub struct LinearState {
    params: Params,
}

impl LinearState {
    pub fn new(params: Params) -> Result<Self> {
        params.validate()?;
        Ok(Self { params })
    }
}

impl Protocol for LinearState {
    type State = LinearStateState;

    fn kind(&self) -> ProtocolKind {
        ProtocolKind::LinearState
    }

    fn params(&self) -> &Params {
        &self.params
    }

    fn interact(
        &self,
        a: &mut LinearStateState,
        b: &mut LinearStateState,
        rand: &mut dyn Randomness,
    ) -> Result<u32> {
        linear_state_step(a, b, &self.params, rand)
    }

    fn check_state(&self, s: &LinearStateState) -> Result<()> {
        let p = &self.params;
        match *s {
            LinearStateState::Settled { rank, nextrank } => {
                if rank < 1 || rank as usize > p.n {
                    return Err(SimError::Consistency(format!("rank {rank} outside 1..={}", p.n)));
                }
                if rank as usize == p.n && nextrank != NextRank::Full {
                    return Err(SimError::Consistency("top rank must have nextrank = Full".into()));
                }
                Ok(())
            }
            LinearStateState::Unsettled { errorcount } if errorcount <= p.error_init => Ok(()),
            LinearStateState::Unsettled { errorcount } => Err(SimError::Consistency(format!(
                "errorcount {errorcount} above {}",
                p.error_init
            ))),
            LinearStateState::Resetting(f) => f.check(p),
        }
    }

    fn slot(&self, s: &LinearStateState) -> Option<usize> {
        match s {
            LinearStateState::Settled { rank, .. } => (*rank as usize).checked_sub(1),
            _ => None,
        }
    }

    fn locally_quiet(&self, s: &LinearStateState) -> bool {
        matches!(s, LinearStateState::Settled { nextrank: NextRank::Full, .. })
    }

    fn is_silent(&self, config: &[LinearStateState]) -> Result<bool> {
        let n = self.params.n;
        let mut seen = vec![false; n];
        for s in config {
            match *s {
                LinearStateState::Settled {
                    rank,
                    nextrank: NextRank::Full,
                } if rank >= 1 && (rank as usize) <= n && !seen[rank as usize - 1] => {
                    seen[rank as usize - 1] = true;
                }
                _ => return Ok(false),
            }
        }
        Ok(config.len() == n)
    }
}
