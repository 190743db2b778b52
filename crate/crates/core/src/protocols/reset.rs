//! Population-wide reset shared by the two bounded-state protocols.
//!
//! A `Resetting` agent is *triggered* at `resetcount = r_max`, *propagating*
//! while `resetcount > 0`, and *dormant* at `resetcount = 0`, where it waits on
//! `delaytimer` before running the host protocol's reset routine.

use serde::Serialize;

use crate::error::{Result, SimError};
use crate::params::Params;
use crate::rng::Randomness;

/// Fields of the `Resetting` role. `delaytimer` is present iff
/// `resetcount == 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct ResetFields {
    pub resetcount: u32,
    pub delaytimer: Option<u32>,
}

impl ResetFields {
    pub fn triggered(params: &Params) -> Self {
        Self {
            resetcount: params.r_max,
            delaytimer: None,
        }
    }

    pub fn propagating(resetcount: u32) -> Self {
        debug_assert!(resetcount > 0);
        Self {
            resetcount,
            delaytimer: None,
        }
    }

    pub fn dormant(delaytimer: u32) -> Self {
        Self {
            resetcount: 0,
            delaytimer: Some(delaytimer),
        }
    }

    pub fn is_dormant(&self) -> bool {
        self.resetcount == 0
    }

    pub fn check(&self, params: &Params) -> Result<()> {
        if self.resetcount > params.r_max {
            return Err(SimError::Consistency(format!(
                "resetcount {} above r_max {}",
                self.resetcount, params.r_max
            )));
        }
        match (self.resetcount, self.delaytimer) {
            (0, Some(d)) if d <= params.d_max => Ok(()),
            (0, Some(d)) => Err(SimError::Consistency(format!(
                "delaytimer {d} above d_max {}",
                params.d_max
            ))),
            (0, None) => Err(SimError::Consistency("dormant agent without delaytimer".into())),
            (_, Some(_)) => Err(SimError::Consistency("propagating agent with delaytimer".into())),
            (_, None) => Ok(()),
        }
    }

    /// Every value of the `Resetting` role under `params`.
    pub fn all(params: &Params) -> impl Iterator<Item = ResetFields> + '_ {
        (1..=params.r_max)
            .map(ResetFields::propagating)
            .chain((0..=params.d_max).map(ResetFields::dormant))
    }
}

/// Role access for states of protocols that embed the reset.
pub trait Resettable {
    fn reset_fields(&self) -> Option<&ResetFields>;
    fn reset_fields_mut(&mut self) -> Option<&mut ResetFields>;
    fn become_resetting(&mut self, fields: ResetFields);

    fn is_resetting(&self) -> bool {
        self.reset_fields().is_some()
    }
}

/// One interaction of the reset routine for `Resetting` agent `a` with `b`.
///
/// Lines run in order on current values. "Just became 0" compares against the
/// value at entry; an agent that was not `Resetting` at entry counts as having
/// just become 0.
pub fn propagate_reset_step<S: Resettable>(
    a: &mut S,
    b: &mut S,
    params: &Params,
    reset_fn: &mut dyn FnMut(&mut S, &mut dyn Randomness),
    rand: &mut dyn Randomness,
) -> Result<()> {
    let entry_a = a.reset_fields().map(|f| f.resetcount);
    let entry_b = b.reset_fields().map(|f| f.resetcount);
    let Some(count_a) = entry_a else {
        return Err(SimError::Consistency("propagate-reset called without a Resetting agent".into()));
    };

    if count_a > 0 && !b.is_resetting() {
        b.become_resetting(ResetFields::dormant(params.d_max));
    }

    if let Some(count_b) = b.reset_fields().map(|f| f.resetcount) {
        let m = (count_a.max(count_b)).saturating_sub(1);
        for f in [a.reset_fields_mut(), b.reset_fields_mut()].into_iter().flatten() {
            f.resetcount = m;
            if m > 0 {
                f.delaytimer = None;
            }
        }
    }

    for (first, entry) in [(true, entry_a), (false, entry_b)] {
        let agent: &mut S = if first { &mut *a } else { &mut *b };
        let Some(f) = agent.reset_fields_mut() else { continue };
        if f.resetcount != 0 {
            continue;
        }
        let timer = if entry != Some(0) {
            params.d_max
        } else {
            f.delaytimer.unwrap_or(0).saturating_sub(1)
        };
        f.delaytimer = Some(timer);
        // the partner test always refers to the second argument
        let partner_computing = first && !b.is_resetting();
        if timer == 0 || partner_computing {
            let agent: &mut S = if first { &mut *a } else { &mut *b };
            reset_fn(agent, rand);
            if agent.is_resetting() {
                return Err(SimError::Consistency("reset routine left the agent Resetting".into()));
            }
        }
    }
    Ok(())
}
