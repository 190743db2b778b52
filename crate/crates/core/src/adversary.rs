//! Initial configurations: targeted worst cases per protocol, uniformly random
//! valid configurations, and correct ones for perturbation tests.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::engine::{Configuration, Protocol};
use crate::error::{Result, SimError};
use crate::params::Params;
use crate::protocols::{
    Cai, CaiState, LinearState, LinearStateState, LinearTime, LinearTimeState, LogTime, LogTimeState, NextRank,
    Obs, ObsState, PhaseClockFields, ResetFields, Roster,
};
use crate::rng::{Randomness, RngStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InitKind {
    AllSame,
    CaiWorst,
    RankPairs,
    GhostRoster,
    FalseFull,
    MidReset,
    StalePhase,
    UniformRandom,
    CorrectRanked,
}

impl InitKind {
    pub const ALL: [InitKind; 9] = [
        InitKind::AllSame,
        InitKind::CaiWorst,
        InitKind::RankPairs,
        InitKind::GhostRoster,
        InitKind::FalseFull,
        InitKind::MidReset,
        InitKind::StalePhase,
        InitKind::UniformRandom,
        InitKind::CorrectRanked,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            InitKind::AllSame => "all_same",
            InitKind::CaiWorst => "cai_worst",
            InitKind::RankPairs => "rank_pairs",
            InitKind::GhostRoster => "ghost_roster",
            InitKind::FalseFull => "false_full",
            InitKind::MidReset => "mid_reset",
            InitKind::StalePhase => "stale_phase",
            InitKind::UniformRandom => "uniform_random",
            InitKind::CorrectRanked => "correct_ranked",
        }
    }
}

impl fmt::Display for InitKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for InitKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        InitKind::ALL
            .into_iter()
            .find(|k| k.tag() == s)
            .ok_or_else(|| SimError::Domain(format!("unknown init kind `{s}`")))
    }
}

/// Protocols that can produce initial configurations.
pub trait Adversary: Protocol {
    /// Raw agent states for `kind`; checked by [`generate_initial`].
    fn generate(&self, kind: InitKind, rng: &mut RngStream) -> Result<Vec<Self::State>>;
}

/// Builds the configuration for `kind` and checks every state against the
/// protocol's invariants.
pub fn generate_initial<P: Adversary>(
    protocol: &P,
    kind: InitKind,
    rng: &mut RngStream,
) -> Result<Configuration<P::State>> {
    let states = protocol.generate(kind, rng)?;
    for s in &states {
        protocol
            .check_state(s)
            .map_err(|e| SimError::Consistency(format!("generated `{kind}` state is invalid: {e}")))?;
    }
    Ok(Configuration::new(states))
}

fn unavailable<P: Protocol + ?Sized>(protocol: &P, kind: InitKind, reason: &str) -> SimError {
    SimError::ConfigurationDomain {
        kind: kind.tag().to_string(),
        protocol: protocol.kind(),
        reason: reason.to_string(),
    }
}

/// 1-based ranks `1,1,2,2,...`; an odd leftover agent takes `n/2 + 1`.
fn paired_ranks(n: usize) -> impl Iterator<Item = u32> {
    (0..n).map(|i| (i / 2) as u32 + 1)
}

/// `count` distinct names from `1..=name_space`.
fn distinct_names(count: usize, params: &Params, rng: &mut RngStream) -> Vec<u64> {
    assert!(count as u64 <= params.name_space);
    let mut seen = BTreeSet::new();
    let mut names = Vec::with_capacity(count);
    while names.len() < count {
        let q = 1 + rng.below(params.name_space);
        if seen.insert(q) {
            names.push(q);
        }
    }
    names
}

fn random_reset(params: &Params, rng: &mut RngStream) -> ResetFields {
    match rng.below(params.r_max as u64 + 1) as u32 {
        0 => ResetFields::dormant(rng.below(params.d_max as u64 + 1) as u32),
        r => ResetFields::propagating(r),
    }
}

/// Number of agents triggered by `mid_reset`.
pub fn mid_reset_count(n: usize) -> usize {
    (n / 4).max(1)
}

impl Adversary for Cai {
    fn generate(&self, kind: InitKind, rng: &mut RngStream) -> Result<Vec<CaiState>> {
        let n = self.params().n;
        let ranks: Vec<u32> = match kind {
            InitKind::AllSame => vec![0; n],
            // two agents at the lowest rank, the top rank empty
            InitKind::CaiWorst => std::iter::once(0).chain(0..n as u32 - 1).collect(),
            InitKind::RankPairs => paired_ranks(n).map(|r| r - 1).collect(),
            InitKind::UniformRandom => (0..n).map(|_| rng.below(n as u64) as u32).collect(),
            InitKind::CorrectRanked => (0..n as u32).collect(),
            _ => return Err(unavailable(self, kind, "the n-state protocol only has ranks")),
        };
        Ok(Cai::from_ranks(&ranks))
    }
}

impl LinearTime {
    fn random_state(&self, rng: &mut RngStream) -> LinearTimeState {
        let p = self.params();
        if rng.chance(0.5) {
            return LinearTimeState::Resetting(random_reset(p, rng));
        }
        let rank = 1 + rng.below(p.n as u64) as u32;
        let name = 1 + rng.below(p.name_space);
        let extra = rng.below(p.n as u64) as usize;
        let mut roster = BTreeSet::from([name]);
        // stop early if the name space is too small to supply `extra` names
        let mut tries = 0;
        while roster.len() < extra + 1 && tries < 64 * p.n {
            roster.insert(1 + rng.below(p.name_space));
            tries += 1;
        }
        LinearTimeState::Collecting {
            rank,
            name,
            roster: Roster::from_items(roster),
        }
    }

    /// Collecting agents with distinct names whose rosters all equal the set of
    /// their names; ranks are the sorted positions.
    fn consistent(&self, count: usize, rng: &mut RngStream) -> Vec<LinearTimeState> {
        let names = distinct_names(count, self.params(), rng);
        let roster = Roster::from_items(names.iter().copied());
        names
            .iter()
            .map(|&name| LinearTimeState::Collecting {
                rank: roster.position(&name) as u32,
                name,
                roster: roster.clone(),
            })
            .collect()
    }
}

impl Adversary for LinearTime {
    fn generate(&self, kind: InitKind, rng: &mut RngStream) -> Result<Vec<LinearTimeState>> {
        let p = self.params();
        let n = p.n;
        match kind {
            InitKind::AllSame => Ok(vec![LinearTimeState::fresh(1, 1); n]),
            InitKind::GhostRoster => {
                if p.name_space <= n as u64 {
                    return Err(unavailable(self, kind, "a ghost name needs name_space > n"));
                }
                let names = distinct_names(n + 1, p, rng);
                let ghost = names[n];
                Ok(names[..n]
                    .iter()
                    .map(|&name| LinearTimeState::Collecting {
                        rank: 1,
                        name,
                        roster: Roster::from_items([name, ghost]),
                    })
                    .collect())
            }
            InitKind::MidReset => {
                let k = mid_reset_count(n);
                let mut states = vec![LinearTimeState::Resetting(ResetFields::triggered(p)); k];
                states.extend(self.consistent(n - k, rng));
                Ok(states)
            }
            InitKind::UniformRandom => Ok((0..n).map(|_| self.random_state(rng)).collect()),
            InitKind::CorrectRanked => Ok(self.consistent(n, rng)),
            _ => Err(unavailable(self, kind, "not a linear-time scenario")),
        }
    }
}

/// Gives agent `j` the name of agent `i` (both become `Collecting` if needed),
/// planting one name collision.
pub fn plant_name_collision(
    config: &mut [LinearTimeState],
    params: &Params,
    rng: &mut RngStream,
) -> Result<()> {
    let n = config.len();
    if n < 2 {
        return Err(SimError::InvalidPopulation(n));
    }
    let i = rng.below(n as u64) as usize;
    let mut j = rng.below(n as u64 - 1) as usize;
    if j >= i {
        j += 1;
    }
    let name = match config[i].name() {
        Some(q) => q,
        None => {
            let q = 1 + rng.below(params.name_space);
            config[i] = LinearTimeState::fresh(1, q);
            q
        }
    };
    config[j] = match &config[j] {
        LinearTimeState::Collecting { rank, roster, .. } => {
            let mut keep: Vec<u64> = roster.iter().copied().filter(|&x| x != name).collect();
            keep.truncate(params.n - 1);
            keep.push(name);
            LinearTimeState::Collecting {
                rank: *rank,
                name,
                roster: Roster::from_items(keep),
            }
        }
        LinearTimeState::Resetting(_) => LinearTimeState::fresh(1, name),
    };
    Ok(())
}

impl LinearState {
    fn random_state(&self, rng: &mut RngStream) -> LinearStateState {
        let p = self.params();
        match rng.below(3) {
            0 => {
                let rank = 1 + rng.below(p.n as u64) as u32;
                let nextrank = if rank as usize == p.n || rng.chance(0.5) {
                    NextRank::Full
                } else {
                    NextRank::Empty
                };
                LinearStateState::Settled { rank, nextrank }
            }
            1 => LinearStateState::Unsettled {
                errorcount: rng.below(p.error_init as u64 + 1) as u32,
            },
            _ => LinearStateState::Resetting(random_reset(p, rng)),
        }
    }
}

impl Adversary for LinearState {
    fn generate(&self, kind: InitKind, rng: &mut RngStream) -> Result<Vec<LinearStateState>> {
        let p = self.params();
        let n = p.n;
        let full = |r: u32| LinearStateState::settled(r, NextRank::Full);
        match kind {
            InitKind::AllSame => Ok(vec![LinearStateState::settled(1, NextRank::Empty); n]),
            InitKind::RankPairs => Ok(paired_ranks(n)
                .map(|r| {
                    let next = if r as usize == n { NextRank::Full } else { NextRank::Empty };
                    LinearStateState::settled(r, next)
                })
                .collect()),
            // rank n is empty, but every Settled agent believes the next rank
            // is taken, so only the error timer can recover
            InitKind::FalseFull => {
                let mut states: Vec<_> = (1..n as u32).map(full).collect();
                states.push(LinearStateState::Unsettled {
                    errorcount: p.error_init,
                });
                Ok(states)
            }
            InitKind::MidReset => {
                let k = mid_reset_count(n);
                let mut states = vec![LinearStateState::Resetting(ResetFields::triggered(p)); k];
                states.extend((1..=(n - k) as u32).map(full));
                Ok(states)
            }
            InitKind::UniformRandom => Ok((0..n).map(|_| self.random_state(rng)).collect()),
            InitKind::CorrectRanked => Ok((1..=n as u32).map(full).collect()),
            _ => Err(unavailable(self, kind, "not a linear-state scenario")),
        }
    }
}

/// Phase window start used by `stale_phase`.
pub const STALE_PHASE_BASE: u64 = 5;

impl LogTime {
    fn random_pairs(&self, count: usize, rng: &mut RngStream) -> Vec<(u32, u64)> {
        let p = self.params();
        (0..count)
            .map(|_| (1 + rng.below(p.n as u64) as u32, 1 + rng.below(p.name_space)))
            .collect()
    }

    fn random_state(&self, phases: u64, rng: &mut RngStream) -> LogTimeState {
        let p = self.params();
        let rank = 1 + rng.below(p.n as u64) as u32;
        let name = 1 + rng.below(p.name_space);
        let clock = PhaseClockFields {
            phase: STALE_PHASE_BASE + rng.below(phases),
            countdown: 1 + rng.below(p.c_max as u64) as u32,
        };
        let extra = rng.below(p.n as u64) as usize;
        let mut roster = self.random_pairs(extra, rng);
        roster.push((rank, name));
        LogTimeState {
            rank,
            name,
            roster: Roster::from_items(roster),
            clock,
        }
    }
}

impl Adversary for LogTime {
    fn generate(&self, kind: InitKind, rng: &mut RngStream) -> Result<Vec<LogTimeState>> {
        let p = self.params();
        let n = p.n;
        let start = PhaseClockFields {
            phase: 0,
            countdown: p.c_max,
        };
        match kind {
            InitKind::AllSame => Ok(vec![LogTimeState::fresh(1, 1, start); n]),
            InitKind::GhostRoster => {
                if p.name_space <= n as u64 {
                    return Err(unavailable(self, kind, "a ghost name needs name_space > n"));
                }
                let names = distinct_names(n + 1, p, rng);
                let ghost = (1, names[n]);
                Ok(names[..n]
                    .iter()
                    .map(|&name| LogTimeState {
                        rank: 1,
                        name,
                        roster: Roster::from_items([(1, name), ghost]),
                        clock: start,
                    })
                    .collect())
            }
            // phases in {base, base + 1}, rosters padded with fabricated pairs
            InitKind::StalePhase => Ok((0..n).map(|_| self.random_state(2, rng)).collect()),
            InitKind::UniformRandom => Ok((0..n).map(|_| self.random_state(4, rng)).collect()),
            InitKind::CorrectRanked => {
                let names = distinct_names(n, p, rng);
                let roster = Roster::from_items(names.iter().enumerate().map(|(i, &q)| (i as u32 + 1, q)));
                Ok(names
                    .iter()
                    .enumerate()
                    .map(|(i, &name)| LogTimeState {
                        rank: i as u32 + 1,
                        name,
                        roster: roster.clone(),
                        clock: start,
                    })
                    .collect())
            }
            _ => Err(unavailable(self, kind, "not a log-time scenario")),
        }
    }
}

impl Adversary for Obs {
    fn generate(&self, kind: InitKind, rng: &mut RngStream) -> Result<Vec<ObsState>> {
        match kind {
            InitKind::AllSame => Ok(vec![ObsState::Leader; 3]),
            InitKind::UniformRandom => Ok((0..3).map(|_| ObsState::ALL[rng.below(6) as usize]).collect()),
            InitKind::CorrectRanked => Ok(vec![ObsState::Leader, ObsState::Follower(0), ObsState::Follower(1)]),
            _ => Err(unavailable(self, kind, "the three-agent protocol has no ranks")),
        }
    }
}
