//! Finite state spaces of the bounded-state protocols.

use crate::engine::Protocol;
use crate::error::Result;
use crate::protocols::{
    Cai, CaiState, LinearState, LinearStateState, LinearTime, LinearTimeState, NextRank, Obs, ObsState,
    ResetFields, Roster,
};

/// Protocols whose valid states can be listed.
pub trait Enumerable: Protocol {
    /// Every state accepted by `check_state`, without duplicates.
    fn state_space(&self) -> Result<Vec<Self::State>>;
}

impl Enumerable for Cai {
    fn state_space(&self) -> Result<Vec<CaiState>> {
        Ok((0..self.params().n as u32).map(CaiState::new).collect())
    }
}

impl Enumerable for Obs {
    fn state_space(&self) -> Result<Vec<ObsState>> {
        Ok(ObsState::ALL.to_vec())
    }
}

impl Enumerable for LinearState {
    fn state_space(&self) -> Result<Vec<LinearStateState>> {
        let p = self.params();
        let mut out = Vec::new();
        for rank in 1..=p.n as u32 {
            if (rank as usize) < p.n {
                out.push(LinearStateState::settled(rank, NextRank::Empty));
            }
            out.push(LinearStateState::settled(rank, NextRank::Full));
        }
        out.extend((0..=p.error_init).map(|errorcount| LinearStateState::Unsettled { errorcount }));
        out.extend(ResetFields::all(p).map(LinearStateState::Resetting));
        Ok(out)
    }
}

/// Subsets of `1..=universe` with at most `max_len` elements, in lexicographic
/// order.
fn subsets(universe: u64, max_len: usize) -> Vec<Vec<u64>> {
    fn grow(from: u64, universe: u64, max_len: usize, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        out.push(cur.clone());
        if cur.len() == max_len {
            return;
        }
        for x in from..=universe {
            cur.push(x);
            grow(x + 1, universe, max_len, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    grow(1, universe, max_len, &mut Vec::new(), &mut out);
    out
}

impl Enumerable for LinearTime {
    fn state_space(&self) -> Result<Vec<LinearTimeState>> {
        let p = self.params();
        let rosters = subsets(p.name_space, p.n);
        let mut out = Vec::new();
        for rank in 1..=p.n as u32 {
            for name in 1..=p.name_space {
                for r in &rosters {
                    if self.allows_foreign_rosters() || r.contains(&name) {
                        out.push(LinearTimeState::Collecting {
                            rank,
                            name,
                            roster: Roster::from_items(r.iter().copied()),
                        });
                    }
                }
            }
        }
        out.extend(ResetFields::all(p).map(LinearTimeState::Resetting));
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Params;
    use crate::protocols::{count_states, ProtocolKind};
    use num_bigint::BigUint;

    #[test]
    fn subset_counts() {
        assert_eq!(subsets(4, 2).len(), 1 + 4 + 6);
        assert_eq!(subsets(3, 3).len(), 8);
    }

    #[test]
    fn spaces_match_closed_form_counts() {
        let p = Params::new(3).unwrap();
        let ls = LinearState::new(p.clone()).unwrap();
        let space = ls.state_space().unwrap();
        assert_eq!(
            BigUint::from(space.len()),
            count_states(ProtocolKind::LinearState, &p).unwrap()
        );
        for s in &space {
            ls.check_state(s).unwrap();
        }

        let p = Params::new(2).unwrap().with_name_space(4).unwrap();
        let lt = LinearTime::new(p.clone()).unwrap();
        let space = lt.state_space().unwrap();
        // rank (2) x name (4) x rosters holding the name (4), plus the reset states
        assert_eq!(space.len(), 2 * 4 * 4 + (p.r_max + p.d_max + 1) as usize);
        for s in &space {
            lt.check_state(s).unwrap();
        }
        let foreign = LinearTime::new(p.clone()).unwrap().with_foreign_rosters(true);
        assert_eq!(
            foreign.state_space().unwrap().len(),
            2 * 4 * 11 + (p.r_max + p.d_max + 1) as usize
        );
    }
}
