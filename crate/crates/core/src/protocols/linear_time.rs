//! Silent ranking in linear time: agents collect each other's random names
//! and take the sorted position of their own name once `n` names are known.
//! Name collisions and ghost names trigger a population-wide reset.

use serde::Serialize;

use crate::engine::Protocol;
use crate::error::{Result, SimError};
use crate::params::Params;
use crate::protocols::reset::{propagate_reset_step, ResetFields, Resettable};
use crate::protocols::roster::Roster;
use crate::protocols::ProtocolKind;
use crate::rng::Randomness;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum LinearTimeState {
    Collecting {
        rank: u32,
        name: u64,
        roster: Roster<u64>,
    },
    Resetting(ResetFields),
}

impl LinearTimeState {
    /// A freshly renamed agent holding only its own name.
    pub fn fresh(rank: u32, name: u64) -> Self {
        LinearTimeState::Collecting {
            rank,
            name,
            roster: Roster::singleton(name),
        }
    }

    pub fn name(&self) -> Option<u64> {
        match self {
            LinearTimeState::Collecting { name, .. } => Some(*name),
            LinearTimeState::Resetting(_) => None,
        }
    }
}

impl Resettable for LinearTimeState {
    fn reset_fields(&self) -> Option<&ResetFields> {
        match self {
            LinearTimeState::Resetting(f) => Some(f),
            _ => None,
        }
    }

    fn reset_fields_mut(&mut self) -> Option<&mut ResetFields> {
        match self {
            LinearTimeState::Resetting(f) => Some(f),
            _ => None,
        }
    }

    fn become_resetting(&mut self, fields: ResetFields) {
        *self = LinearTimeState::Resetting(fields);
    }
}

/// Reset routine: collect again under a fresh uniformly random name, starting
/// from rank 1.
pub fn reset_linear_time(state: &mut LinearTimeState, params: &Params, rand: &mut dyn Randomness) {
    let name = 1 + rand.below(params.name_space);
    *state = LinearTimeState::fresh(1, name);
}

/// One interaction; returns the number of agents that became triggered.
pub fn linear_time_step(
    a: &mut LinearTimeState,
    b: &mut LinearTimeState,
    params: &Params,
    rand: &mut dyn Randomness,
) -> Result<u32> {
    use LinearTimeState::*;
    match (&mut *a, &mut *b) {
        (
            Collecting {
                rank: rank_a,
                name: name_a,
                roster: roster_a,
            },
            Collecting {
                rank: rank_b,
                name: name_b,
                roster: roster_b,
            },
        ) => {
            if name_a == name_b || roster_a.union_len(roster_b) > params.n {
                *a = Resetting(ResetFields::triggered(params));
                *b = Resetting(ResetFields::triggered(params));
                return Ok(2);
            }
            if roster_a != roster_b {
                let union = roster_a.union(roster_b);
                *roster_a = union.clone();
                *roster_b = union;
            }
            if roster_a.len() == params.n {
                *rank_a = roster_a.position(name_a).min(params.n) as u32;
                *rank_b = roster_b.position(name_b).min(params.n) as u32;
            }
            Ok(0)
        }
        _ => {
            let mut reset = |s: &mut LinearTimeState, r: &mut dyn Randomness| reset_linear_time(s, params, r);
            if a.is_resetting() {
                propagate_reset_step(a, b, params, &mut reset, rand)?;
            } else {
                propagate_reset_step(b, a, params, &mut reset, rand)?;
            }
            Ok(0)
        }
    }
}

#[derive(Debug, Clone)]
pub struct LinearTime {
    params: Params,
    foreign_rosters: bool,
}

impl LinearTime {
    pub fn new(params: Params) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            foreign_rosters: false,
        })
    }

    /// Also accept `Collecting` states whose roster lacks their own name.
    ///
    /// The reset routine and roster unions never produce such states, and a
    /// configuration built from them can be silent without being ranked.
    pub fn with_foreign_rosters(mut self, allow: bool) -> Self {
        self.foreign_rosters = allow;
        self
    }

    pub fn allows_foreign_rosters(&self) -> bool {
        self.foreign_rosters
    }
}

impl Protocol for LinearTime {
    type State = LinearTimeState;

    fn kind(&self) -> ProtocolKind {
        ProtocolKind::LinearTime
    }

    fn params(&self) -> &Params {
        &self.params
    }

    fn interact(
        &self,
        a: &mut LinearTimeState,
        b: &mut LinearTimeState,
        rand: &mut dyn Randomness,
    ) -> Result<u32> {
        linear_time_step(a, b, &self.params, rand)
    }

    fn check_state(&self, s: &LinearTimeState) -> Result<()> {
        let p = &self.params;
        match s {
            LinearTimeState::Collecting { rank, name, roster } => {
                if *rank < 1 || *rank as usize > p.n {
                    return Err(SimError::Consistency(format!("rank {rank} outside 1..={}", p.n)));
                }
                if *name < 1 || *name > p.name_space {
                    return Err(SimError::Consistency(format!("name {name} outside 1..={}", p.name_space)));
                }
                if roster.len() > p.n {
                    return Err(SimError::Consistency(format!("roster holds {} > n names", roster.len())));
                }
                if roster.iter().any(|&x| x < 1 || x > p.name_space) {
                    return Err(SimError::Consistency("roster name outside the name space".into()));
                }
                if !self.foreign_rosters && !roster.contains(name) {
                    return Err(SimError::Consistency(format!("roster lacks own name {name}")));
                }
                Ok(())
            }
            LinearTimeState::Resetting(f) => f.check(p),
        }
    }

    fn slot(&self, s: &LinearTimeState) -> Option<usize> {
        match s {
            LinearTimeState::Collecting { rank, .. } => (*rank as usize).checked_sub(1),
            LinearTimeState::Resetting(_) => None,
        }
    }

    fn locally_quiet(&self, s: &LinearTimeState) -> bool {
        matches!(s, LinearTimeState::Collecting { roster, .. } if roster.len() == self.params.n)
    }

    fn is_silent(&self, config: &[LinearTimeState]) -> Result<bool> {
        let n = self.params.n;
        let names: Roster<u64> = config.iter().filter_map(|s| s.name()).collect();
        if names.len() != n || config.len() != n {
            return Ok(false);
        }
        Ok(config.iter().all(|s| match s {
            LinearTimeState::Collecting { rank, name, roster } => {
                *roster == names && *rank as usize == names.position(name)
            }
            LinearTimeState::Resetting(_) => false,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{detect_correct, detect_silent};
    use crate::rng::RngStream;

    fn collecting(rank: u32, name: u64, roster: &[u64]) -> LinearTimeState {
        LinearTimeState::Collecting {
            rank,
            name,
            roster: Roster::from_items(roster.iter().copied()),
        }
    }

    #[test]
    fn equal_names_trigger_both() {
        let p = Params::new(3).unwrap();
        let mut a = collecting(1, 7, &[7]);
        let mut b = collecting(2, 7, &[7]);
        let mut rng = RngStream::new(1);
        let triggered = linear_time_step(&mut a, &mut b, &p, &mut rng).unwrap();
        assert_eq!(triggered, 2);
        assert_eq!(a, LinearTimeState::Resetting(ResetFields::triggered(&p)));
        assert_eq!(b, LinearTimeState::Resetting(ResetFields::triggered(&p)));
    }

    #[test]
    fn full_union_assigns_sorted_ranks() {
        let p = Params::new(3).unwrap();
        let mut a = collecting(3, 2, &[2, 9]);
        let mut b = collecting(3, 14, &[9, 14]);
        let mut rng = RngStream::new(1);
        linear_time_step(&mut a, &mut b, &p, &mut rng).unwrap();
        assert_eq!(a, collecting(1, 2, &[2, 9, 14]));
        assert_eq!(b, collecting(3, 14, &[2, 9, 14]));
    }

    #[test]
    fn oversized_union_exposes_ghosts() {
        let p = Params::new(3).unwrap();
        let mut a = collecting(1, 1, &[1, 2, 3]);
        let mut b = collecting(1, 4, &[4]);
        let mut rng = RngStream::new(1);
        assert_eq!(linear_time_step(&mut a, &mut b, &p, &mut rng).unwrap(), 2);
        assert!(a.is_resetting() && b.is_resetting());
    }

    #[test]
    fn partial_union_keeps_ranks() {
        let p = Params::new(3).unwrap();
        let mut a = collecting(2, 5, &[5]);
        let mut b = collecting(2, 6, &[6]);
        let mut rng = RngStream::new(1);
        linear_time_step(&mut a, &mut b, &p, &mut rng).unwrap();
        assert_eq!(a, collecting(2, 5, &[5, 6]));
        assert_eq!(b, collecting(2, 6, &[5, 6]));
    }

    #[test]
    fn resetting_partner_delegates_either_way() {
        let p = Params::new(3).unwrap();
        let mut rng = RngStream::new(1);
        let mut a = collecting(2, 5, &[5]);
        let mut b = LinearTimeState::Resetting(ResetFields::propagating(5));
        linear_time_step(&mut a, &mut b, &p, &mut rng).unwrap();
        assert_eq!(a, LinearTimeState::Resetting(ResetFields::propagating(4)));
        assert_eq!(b, LinearTimeState::Resetting(ResetFields::propagating(4)));
    }

    #[test]
    fn awakening_draws_a_fresh_name() {
        let p = Params::new(3).unwrap();
        let mut rng = RngStream::new(1);
        let mut a = LinearTimeState::Resetting(ResetFields::dormant(3));
        let mut b = collecting(2, 5, &[5]);
        linear_time_step(&mut a, &mut b, &p, &mut rng).unwrap();
        match a {
            LinearTimeState::Collecting { name, ref roster, .. } => {
                assert!((1..=p.name_space).contains(&name));
                assert_eq!(roster, &Roster::singleton(name));
            }
            _ => panic!("agent should have awakened"),
        }
    }

    #[test]
    fn predicates() {
        let proto = LinearTime::new(Params::new(3).unwrap()).unwrap();
        let full = [2u64, 9, 14];
        let silent = vec![
            collecting(1, 2, &full),
            collecting(2, 9, &full),
            collecting(3, 14, &full),
        ];
        assert!(detect_correct(&proto, &silent));
        assert!(detect_silent(&proto, &silent).unwrap());

        let mut wrong_rank = silent.clone();
        wrong_rank[0] = collecting(2, 2, &full);
        assert!(!detect_silent(&proto, &wrong_rank).unwrap());

        let mut partial = silent.clone();
        partial[2] = collecting(3, 14, &[9, 14]);
        assert!(detect_correct(&proto, &partial));
        assert!(!detect_silent(&proto, &partial).unwrap());

        let mut resetting = silent;
        resetting[1] = LinearTimeState::Resetting(ResetFields::dormant(1));
        assert!(!detect_correct(&proto, &resetting));
    }

    #[test]
    fn own_name_must_be_listed_by_default() {
        let proto = LinearTime::new(Params::new(3).unwrap()).unwrap();
        assert!(proto.check_state(&collecting(1, 2, &[3])).is_err());
        let lax = proto.with_foreign_rosters(true);
        assert!(lax.check_state(&collecting(1, 2, &[3])).is_ok());
    }
}
