//! Uniform random pairwise scheduler and the execution loop shared by every
//! protocol.

use std::fmt;
use std::hash::Hash;
use std::ops::{Deref, DerefMut};

use serde::Serialize;

use crate::error::{Result, SimError};
use crate::params::Params;
use crate::protocols::ProtocolKind;
use crate::rng::{Randomness, RngStream};

/// Transition function and correctness/silence predicates of one protocol.
///
/// Implementations must be permutation-equivariant: agents are
/// distinguishable to the harness only.
pub trait Protocol: Sync {
    type State: Clone + Eq + Ord + Hash + fmt::Debug + Send + Sync;

    fn kind(&self) -> ProtocolKind;

    fn params(&self) -> &Params;

    /// Applies one interaction in place. Returns how many agents entered the
    /// triggered reset state.
    fn interact(
        &self,
        initiator: &mut Self::State,
        responder: &mut Self::State,
        rand: &mut dyn Randomness,
    ) -> Result<u32>;

    /// Per-state invariants.
    fn check_state(&self, state: &Self::State) -> Result<()>;

    /// The rank slot (0-based) a state occupies, `None` for unranked roles.
    fn slot(&self, state: &Self::State) -> Option<usize>;

    /// Correctness from rank-slot counts. Ranking protocols need a permutation.
    fn correct_from_tally(&self, tally: &Tally) -> bool {
        tally.is_permutation()
    }

    /// Per-agent necessary condition for silence; lets the run loop skip the
    /// closed-form check until every agent satisfies it.
    fn locally_quiet(&self, state: &Self::State) -> bool;

    /// Closed-form silence predicate.
    fn is_silent(&self, config: &[Self::State]) -> Result<bool>;
}

/// Agent-indexed global state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Configuration<S>(pub Vec<S>);

impl<S> Configuration<S> {
    pub fn new(states: Vec<S>) -> Self {
        Self(states)
    }

    pub fn into_inner(self) -> Vec<S> {
        self.0
    }
}

impl<S> Deref for Configuration<S> {
    type Target = [S];
    fn deref(&self) -> &[S] {
        &self.0
    }
}

impl<S> DerefMut for Configuration<S> {
    fn deref_mut(&mut self) -> &mut [S] {
        &mut self.0
    }
}

/// Counts of agents per rank slot.
#[derive(Debug, Clone)]
pub struct Tally {
    counts: Vec<u32>,
    ones: usize,
    unslotted: usize,
}

impl Tally {
    pub fn new(n: usize) -> Self {
        Self {
            counts: vec![0; n],
            ones: 0,
            unslotted: 0,
        }
    }

    pub fn from_slots(n: usize, slots: impl IntoIterator<Item = Option<usize>>) -> Self {
        let mut t = Self::new(n);
        for s in slots {
            t.add(s);
        }
        t
    }

    pub fn add(&mut self, slot: Option<usize>) {
        match slot {
            Some(s) if s < self.counts.len() => {
                self.counts[s] += 1;
                match self.counts[s] {
                    1 => self.ones += 1,
                    2 => self.ones -= 1,
                    _ => {}
                }
            }
            _ => self.unslotted += 1,
        }
    }

    pub fn remove(&mut self, slot: Option<usize>) {
        match slot {
            Some(s) if s < self.counts.len() => {
                self.counts[s] -= 1;
                match self.counts[s] {
                    0 => self.ones -= 1,
                    1 => self.ones += 1,
                    _ => {}
                }
            }
            _ => self.unslotted -= 1,
        }
    }

    pub fn count(&self, slot: usize) -> u32 {
        self.counts[slot]
    }

    pub fn unslotted(&self) -> usize {
        self.unslotted
    }

    /// Every slot holds exactly one agent and no agent is unslotted.
    pub fn is_permutation(&self) -> bool {
        self.ones == self.counts.len() && self.unslotted == 0
    }
}

/// Draws an ordered pair of distinct agents, uniform over all `n(n-1)` pairs,
/// with a single draw.
pub fn pick_pair(rng: &mut impl Randomness, n: usize) -> Result<(usize, usize)> {
    if n < 2 {
        return Err(SimError::InvalidPopulation(n));
    }
    let code = rng.below((n * (n - 1)) as u64) as usize;
    let i = code / (n - 1);
    let mut j = code % (n - 1);
    if j >= i {
        j += 1;
    }
    Ok((i, j))
}

/// Mutable access to two distinct elements.
pub fn pair_mut<S>(states: &mut [S], i: usize, j: usize) -> (&mut S, &mut S) {
    assert_ne!(i, j, "an agent cannot interact with itself");
    if i < j {
        let (lo, hi) = states.split_at_mut(j);
        (&mut lo[i], &mut hi[0])
    } else {
        let (lo, hi) = states.split_at_mut(i);
        (&mut hi[0], &mut lo[j])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StepEvent {
    pub index: u64,
    pub initiator: usize,
    pub responder: usize,
    pub triggered: u32,
}

/// Applies the protocol to the given ordered pair and checks both results.
pub fn apply_pair<P: Protocol>(
    protocol: &P,
    config: &mut [P::State],
    initiator: usize,
    responder: usize,
    rand: &mut dyn Randomness,
) -> Result<u32> {
    let (a, b) = pair_mut(config, initiator, responder);
    let triggered = protocol.interact(a, b, rand)?;
    protocol
        .check_state(a)
        .and_then(|_| protocol.check_state(b))
        .map_err(|e| SimError::Consistency(format!("after interaction ({initiator}, {responder}): {e}")))?;
    Ok(triggered)
}

/// One scheduler step: picks a pair and applies the transition.
pub fn step<P: Protocol>(
    protocol: &P,
    config: &mut Configuration<P::State>,
    rng: &mut RngStream,
    index: u64,
) -> Result<StepEvent> {
    let (initiator, responder) = pick_pair(rng, config.len())?;
    let triggered = apply_pair(protocol, config, initiator, responder, rng)?;
    Ok(StepEvent {
        index,
        initiator,
        responder,
        triggered,
    })
}

pub fn detect_correct<P: Protocol>(protocol: &P, config: &[P::State]) -> bool {
    let tally = Tally::from_slots(protocol.params().n, config.iter().map(|s| protocol.slot(s)));
    config.len() == protocol.params().n && protocol.correct_from_tally(&tally)
}

pub fn detect_silent<P: Protocol>(protocol: &P, config: &[P::State]) -> Result<bool> {
    protocol.is_silent(config)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunMetrics {
    pub interactions: u64,
    pub parallel_time: f64,
    pub silence_interaction: Option<u64>,
    pub convergence_interaction: Option<u64>,
    pub stable_tail: bool,
    pub timed_out: bool,
    pub reset_triggers: u64,
}

/// Convergence fields derived from a correctness timeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Convergence {
    pub convergence_interaction: Option<u64>,
    pub stable_tail: bool,
}

/// Hindsight convergence over `timeline[t]` = correctness after `t`
/// interactions (entry 0 is the initial configuration).
pub fn measure_convergence(timeline: &[bool], tail_margin: u64) -> Convergence {
    let trailing = timeline.iter().rev().take_while(|&&c| c).count() as u64;
    let stable_tail = trailing > 0 && trailing >= tail_margin;
    let convergence_interaction = if stable_tail {
        Some(match timeline.iter().rposition(|&c| !c) {
            Some(last_false) => last_false as u64 + 1,
            None => 0,
        })
    } else {
        None
    };
    Convergence {
        convergence_interaction,
        stable_tail,
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Keep the per-interaction correctness timeline.
    pub record_trace: bool,
    /// Stop a non-silent run once correctness has held for `tail_margin`
    /// consecutive interactions.
    pub halt_on_stable_tail: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutcome<S> {
    pub config: Configuration<S>,
    pub metrics: RunMetrics,
    pub timeline: Option<Vec<bool>>,
}

struct Tracker {
    tally: Tally,
    quiet: usize,
}

impl Tracker {
    fn new<P: Protocol>(protocol: &P, config: &[P::State]) -> Self {
        let n = protocol.params().n;
        Self {
            tally: Tally::from_slots(n, config.iter().map(|s| protocol.slot(s))),
            quiet: config.iter().filter(|s| protocol.locally_quiet(s)).count(),
        }
    }

    fn remove<P: Protocol>(&mut self, protocol: &P, s: &P::State) {
        self.tally.remove(protocol.slot(s));
        self.quiet -= protocol.locally_quiet(s) as usize;
    }

    fn add<P: Protocol>(&mut self, protocol: &P, s: &P::State) {
        self.tally.add(protocol.slot(s));
        self.quiet += protocol.locally_quiet(s) as usize;
    }
}

/// Runs the scheduler until the horizon or, for silent protocols, until a
/// silent configuration is reached.
pub fn run<P: Protocol>(
    protocol: &P,
    config: Configuration<P::State>,
    rng: &mut RngStream,
    options: RunOptions,
) -> Result<RunOutcome<P::State>> {
    let params = protocol.params();
    let n = params.n;
    if config.len() != n {
        return Err(SimError::Consistency(format!(
            "configuration has {} agents, expected {n}",
            config.len()
        )));
    }
    for s in config.iter() {
        protocol.check_state(s)?;
    }
    let silent_protocol = protocol.kind().is_silent();
    let mut config = config;
    let mut tracker = Tracker::new(protocol, &config);
    let is_quiet_now = |tracker: &Tracker, config: &[P::State]| -> Result<bool> {
        if !silent_protocol
            || tracker.quiet != n
            || !protocol.correct_from_tally(&tracker.tally)
        {
            return Ok(false);
        }
        protocol.is_silent(config)
    };

    let mut metrics = RunMetrics::default();
    let mut correct = protocol.correct_from_tally(&tracker.tally);
    let mut timeline = options.record_trace.then(|| vec![correct]);
    let mut last_incorrect: Option<u64> = (!correct).then_some(0);
    let mut streak: u64 = correct as u64;

    let mut t: u64 = 0;
    let mut silent = is_quiet_now(&tracker, &config)?;
    let mut halted = false;
    while !silent && t < params.max_interactions {
        if options.halt_on_stable_tail && !silent_protocol && streak > 0 && streak >= params.tail_margin {
            halted = true;
            break;
        }
        let (i, j) = pick_pair(rng, n)?;
        tracker.remove(protocol, &config[i]);
        tracker.remove(protocol, &config[j]);
        metrics.reset_triggers += apply_pair(protocol, &mut config, i, j, rng)? as u64;
        tracker.add(protocol, &config[i]);
        tracker.add(protocol, &config[j]);
        t += 1;

        correct = protocol.correct_from_tally(&tracker.tally);
        if correct {
            streak += 1;
        } else {
            streak = 0;
            last_incorrect = Some(t);
        }
        if let Some(tl) = timeline.as_mut() {
            tl.push(correct);
        }
        silent = is_quiet_now(&tracker, &config)?;
    }

    metrics.interactions = t;
    metrics.parallel_time = t as f64 / n as f64;
    if silent {
        metrics.silence_interaction = Some(t);
        metrics.stable_tail = true;
    } else {
        metrics.timed_out = !halted;
        metrics.stable_tail = streak > 0 && streak >= params.tail_margin;
    }
    if metrics.stable_tail {
        metrics.convergence_interaction = Some(last_incorrect.map_or(0, |l| l + 1));
    }
    Ok(RunOutcome {
        config,
        metrics,
        timeline,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_from_two_agents() {
        let mut rng = RngStream::new(3);
        let mut seen = [0u32; 2];
        for _ in 0..1000 {
            match pick_pair(&mut rng, 2).unwrap() {
                (0, 1) => seen[0] += 1,
                (1, 0) => seen[1] += 1,
                p => panic!("unexpected pair {p:?}"),
            }
        }
        assert!(seen[0] > 400 && seen[1] > 400);
    }

    #[test]
    fn pair_needs_two_agents() {
        let mut rng = RngStream::new(3);
        assert_eq!(pick_pair(&mut rng, 1), Err(SimError::InvalidPopulation(1)));
        assert_eq!(pick_pair(&mut rng, 0), Err(SimError::InvalidPopulation(0)));
    }

    #[test]
    fn pairs_are_distinct() {
        let mut rng = RngStream::new(11);
        for n in 2..40 {
            for _ in 0..200 {
                let (i, j) = pick_pair(&mut rng, n).unwrap();
                assert!(i != j && i < n && j < n);
            }
        }
    }

    #[test]
    fn pair_mut_orders() {
        let mut v = vec![0, 1, 2, 3];
        let (a, b) = pair_mut(&mut v, 3, 1);
        assert_eq!((*a, *b), (3, 1));
        let (a, b) = pair_mut(&mut v, 0, 2);
        assert_eq!((*a, *b), (0, 2));
    }

    #[test]
    fn convergence_examples() {
        let (f, t) = (false, true);
        let c = measure_convergence(&[f, f, t, t, t, t], 3);
        assert_eq!(c.convergence_interaction, Some(2));
        assert!(c.stable_tail);
        let c = measure_convergence(&[f, t, f, t, t], 2);
        assert_eq!(c.convergence_interaction, Some(3));
        let c = measure_convergence(&[t, t, t], 2);
        assert_eq!(c.convergence_interaction, Some(0));
        let c = measure_convergence(&[f, f, f], 1);
        assert_eq!(c.convergence_interaction, None);
        assert!(!c.stable_tail);
        // short tail: not resolved
        let c = measure_convergence(&[f, t], 2);
        assert_eq!(c.convergence_interaction, None);
    }

    #[test]
    fn tally_tracks_permutations() {
        let mut t = Tally::from_slots(3, [Some(0), Some(0), Some(1)]);
        assert!(!t.is_permutation());
        t.remove(Some(0));
        t.add(Some(2));
        assert!(t.is_permutation());
        t.remove(Some(2));
        t.add(None);
        assert!(!t.is_permutation());
        assert_eq!(t.unslotted(), 1);
    }
}
