//! Barrier ranks of the n-state protocol.
//!
//! Rank `k` is a barrier when, for every `r` in `0..n`, the ranks
//! `k, k-1, ..., k-r` (mod n) hold at most `r + 1` agents in total. A barrier
//! exists in every configuration and survives every transition, so the
//! barrier rank is never held by two agents.

use crate::engine::pair_mut;
use crate::protocols::{cai_step, CaiState};

/// Agents per rank, `m_0..m_{n-1}`.
pub fn rank_counts(config: &[CaiState], n: usize) -> Vec<usize> {
    let mut m = vec![0; n];
    for s in config {
        m[s.rank as usize] += 1;
    }
    m
}

pub fn is_barrier(counts: &[usize], k: usize) -> bool {
    let n = counts.len();
    let mut sum = 0;
    for r in 0..n {
        sum += counts[(k + n - r % n) % n];
        if sum > r + 1 {
            return false;
        }
    }
    true
}

/// Smallest minimizer of `S_i = sum_{j <= i} (m_j - 1)`.
pub fn barrier_rank(config: &[CaiState], n: usize) -> usize {
    let m = rank_counts(config, n);
    let mut best = (i64::MAX, 0);
    let mut s = 0i64;
    for (i, &c) in m.iter().enumerate() {
        s += c as i64 - 1;
        if s < best.0 {
            best = (s, i);
        }
    }
    let k = best.1;
    assert!(is_barrier(&m, k), "rank {k} is not a barrier of {m:?}");
    k
}

/// Whether `k` is still a barrier after every possible single interaction.
pub fn check_barrier_preserved(config: &[CaiState], n: usize, k: usize) -> bool {
    let mut next = config.to_vec();
    for i in 0..config.len() {
        for j in 0..config.len() {
            if i == j {
                continue;
            }
            next.copy_from_slice(config);
            let (a, b) = pair_mut(&mut next, i, j);
            (*a, *b) = cai_step(*a, *b, n);
            if !is_barrier(&rank_counts(&next, n), k) {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::Cai;

    #[test]
    fn examples() {
        assert_eq!(barrier_rank(&Cai::from_ranks(&[0, 1, 2]), 3), 0);
        let worst = Cai::from_ranks(&[0, 0, 1]);
        assert_eq!(barrier_rank(&worst, 3), 2);
        assert!(is_barrier(&[2, 1, 0], 2));
        assert!(!is_barrier(&[2, 1, 0], 0));
        assert!(check_barrier_preserved(&worst, 3, 2));
    }
}
