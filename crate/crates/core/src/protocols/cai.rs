//! The n-state silent ranking protocol: equal ranks push the responder up by
//! one, modulo n.

use serde::Serialize;

use crate::engine::Protocol;
use crate::error::{Result, SimError};
use crate::params::Params;
use crate::protocols::ProtocolKind;
use crate::rng::Randomness;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CaiState {
    pub rank: u32,
}

impl CaiState {
    pub fn new(rank: u32) -> Self {
        Self { rank }
    }
}

pub fn cai_step(a: CaiState, b: CaiState, n: usize) -> (CaiState, CaiState) {
    if a.rank == b.rank {
        (a, CaiState::new((b.rank + 1) % n as u32))
    } else {
        (a, b)
    }
}

#[derive(Debug, Clone)]
pub struct Cai {
    params: Params,
}

impl Cai {
    pub fn new(params: Params) -> Result<Self> {
        params.validate()?;
        Ok(Self { params })
    }

    pub fn from_ranks(ranks: &[u32]) -> Vec<CaiState> {
        ranks.iter().map(|&r| CaiState::new(r)).collect()
    }
}

impl Protocol for Cai {
    type State = CaiState;

    fn kind(&self) -> ProtocolKind {
        ProtocolKind::Cai
    }

    fn params(&self) -> &Params {
        &self.params
    }

    fn interact(&self, a: &mut CaiState, b: &mut CaiState, _rand: &mut dyn Randomness) -> Result<u32> {
        let (na, nb) = cai_step(*a, *b, self.params.n);
        *a = na;
        *b = nb;
        Ok(0)
    }

    fn check_state(&self, s: &CaiState) -> Result<()> {
        if (s.rank as usize) < self.params.n {
            Ok(())
        } else {
            Err(SimError::Consistency(format!("rank {} outside 0..{}", s.rank, self.params.n)))
        }
    }

    fn slot(&self, s: &CaiState) -> Option<usize> {
        Some(s.rank as usize)
    }

    fn locally_quiet(&self, _s: &CaiState) -> bool {
        true
    }

    fn is_silent(&self, config: &[CaiState]) -> Result<bool> {
        let mut seen = vec![false; self.params.n];
        for s in config {
            let r = s.rank as usize;
            if r >= seen.len() || seen[r] {
                return Ok(false);
            }
            seen[r] = true;
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{detect_correct, detect_silent};

    #[test]
    fn step_examples() {
        let s = CaiState::new;
        assert_eq!(cai_step(s(3), s(3), 5), (s(3), s(4)));
        assert_eq!(cai_step(s(4), s(4), 5), (s(4), s(0)));
        assert_eq!(cai_step(s(2), s(3), 5), (s(2), s(3)));
    }

    #[test]
    fn predicates() {
        let p = Cai::new(Params::new(3).unwrap()).unwrap();
        assert!(detect_correct(&p, &Cai::from_ranks(&[2, 0, 1])));
        assert!(!detect_correct(&p, &Cai::from_ranks(&[2, 2, 1])));
        assert!(detect_silent(&p, &Cai::from_ranks(&[0, 1, 2])).unwrap());
        assert!(!detect_silent(&p, &Cai::from_ranks(&[0, 0, 2])).unwrap());
        assert!(p.check_state(&CaiState::new(3)).is_err());
    }
}
