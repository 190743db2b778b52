//! Exhaustive enumeration of the random choices made by one transition.

use crate::error::Result;
use crate::rng::Randomness;

/// Replays a fixed prefix of choices and records the arity of every new draw,
/// so that repeated calls walk all branches like an odometer.
#[derive(Debug, Default)]
struct Cursor {
    choices: Vec<u64>,
    arities: Vec<u64>,
    depth: usize,
    prob: f64,
}

impl Cursor {
    fn draw(&mut self, arity: u64) -> u64 {
        if self.depth == self.choices.len() {
            self.choices.push(0);
            self.arities.push(arity);
        }
        debug_assert_eq!(self.arities[self.depth], arity, "transition randomness is not replayable");
        let c = self.choices[self.depth];
        self.depth += 1;
        c
    }

    /// Moves to the next branch; false once all have been visited.
    fn advance(&mut self) -> bool {
        self.choices.truncate(self.depth);
        self.arities.truncate(self.depth);
        while let Some(last) = self.choices.last_mut() {
            *last += 1;
            if *last < *self.arities.last().unwrap() {
                return true;
            }
            self.choices.pop();
            self.arities.pop();
        }
        false
    }
}

impl Randomness for Cursor {
    fn below(&mut self, bound: u64) -> u64 {
        self.prob /= bound as f64;
        self.draw(bound)
    }

    fn chance(&mut self, p: f64) -> bool {
        // same short-cuts as the sampling stream: certain outcomes draw nothing
        if p >= 1.0 {
            return true;
        }
        if p <= 0.0 {
            return false;
        }
        let hit = self.draw(2) == 0;
        self.prob *= if hit { p } else { 1.0 - p };
        hit
    }
}

/// Calls `f` once per distinct sequence of random outcomes and passes each
/// result to `sink` with its probability.
pub fn for_each_branch<R>(
    mut f: impl FnMut(&mut dyn Randomness) -> Result<R>,
    mut sink: impl FnMut(R, f64),
) -> Result<()> {
    let mut cursor = Cursor::default();
    loop {
        cursor.depth = 0;
        cursor.prob = 1.0;
        let out = f(&mut cursor)?;
        sink(out, cursor.prob);
        if !cursor.advance() {
            return Ok(());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_function_has_one_branch() {
        let mut seen = vec![];
        for_each_branch(|_| Ok(7), |x, p| seen.push((x, p))).unwrap();
        assert_eq!(seen, vec![(7, 1.0)]);
    }

    #[test]
    fn nested_draws_cover_the_product() {
        let mut seen = vec![];
        for_each_branch(
            |r| {
                let a = r.below(3);
                let b = if a == 1 { r.chance(0.25) as u64 } else { 9 };
                Ok((a, b))
            },
            |x, p| seen.push((x, p)),
        )
        .unwrap();
        assert_eq!(seen.len(), 4);
        let total: f64 = seen.iter().map(|s| s.1).sum();
        assert!((total - 1.0).abs() < 1e-15);
        assert!(seen.contains(&((1, 1), 0.25 / 3.0)));
        assert!(seen.contains(&((1, 0), 0.75 / 3.0)));
    }
}
