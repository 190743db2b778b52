//! Seeded random streams.
//!
//! Every run owns one [`RngStream`]. Runs of an experiment derive their
//! streams from `(master seed, run index)`: the seed keys a ChaCha8 generator
//! and the run index selects one of its 2^64 independent streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Source of transition randomness.
///
/// Protocols draw through this trait rather than a concrete generator so the
/// oracle can enumerate every random branch of a transition.
pub trait Randomness {
    /// Uniform draw from `0..bound`. `bound` must be positive.
    fn below(&mut self, bound: u64) -> u64;

    /// `true` with probability `p`.
    fn chance(&mut self, p: f64) -> bool;
}

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::substream(seed, 0)
    }

    /// Independent substream number `index` of the master `seed`.
    pub fn substream(seed: u64, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        Self {
            seed,
            stream: index,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Position in 32-bit words consumed since construction.
    pub fn position(&self) -> u128 {
        self.rng.get_word_pos()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.gen()
    }

    pub fn uniform_f64(&mut self) -> f64 {
        self.rng.gen()
    }
}

impl Randomness for RngStream {
    fn below(&mut self, bound: u64) -> u64 {
        self.rng.gen_range(0..bound)
    }

    fn chance(&mut self, p: f64) -> bool {
        if p >= 1.0 {
            return true;
        }
        if p <= 0.0 {
            return false;
        }
        self.rng.gen_bool(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_seeds_agree() {
        let mut a = RngStream::substream(7, 3);
        let mut b = RngStream::substream(7, 3);
        for _ in 0..100 {
            assert_eq!(a.below(1000), b.below(1000));
        }
        assert_eq!(a.position(), b.position());
    }

    #[test]
    fn substreams_differ() {
        let mut a = RngStream::substream(7, 0);
        let mut b = RngStream::substream(7, 1);
        let xs: Vec<u64> = (0..16).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..16).map(|_| b.next_u64()).collect();
        assert_ne!(xs, ys);
    }

    #[test]
    fn degenerate_chances_consume_nothing() {
        let mut a = RngStream::new(1);
        assert!(a.chance(1.0));
        assert!(!a.chance(0.0));
        assert_eq!(a.position(), 0);
    }
}
