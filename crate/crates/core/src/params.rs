//! Population size and every constant derived from it.

use serde::Serialize;

use crate::error::{Result, SimError};

/// Derived constants for a population of `n` agents.
///
/// Logarithmic ceilings use `log_n = max(1, ceil(ln n))` so every counter is a
/// positive integer even for `n = 2`. The oracle may shrink the ceilings and the
/// name universe; such instances carry `scaled = true`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Params {
    pub n: usize,
    pub log_n: u32,
    pub name_space: u64,
    pub r_max: u32,
    pub d_max: u32,
    pub c_max: u32,
    pub error_init: u32,
    pub coin_bias: f64,
    pub max_interactions: u64,
    pub tail_margin: u64,
    pub scaled: bool,
}

/// `max(1, ceil(ln n))`.
pub fn effective_log(n: usize) -> u32 {
    ((n as f64).ln().ceil() as u32).max(1)
}

impl Params {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(SimError::InvalidPopulation(n));
        }
        let log_n = effective_log(n);
        let ln = (n as f64).ln();
        let coin_bias = if ln <= 1.0 { 1.0 } else { 1.0 / ln };
        let name_space = (n as u64).checked_pow(3).ok_or_else(|| SimError::InvalidParams {
            name: "name_space",
            reason: format!("n^3 overflows for n = {n}"),
        })?;
        Ok(Self {
            n,
            log_n,
            name_space,
            r_max: 60 * log_n,
            d_max: 408 * log_n,
            c_max: 24 * log_n,
            error_init: 4 * n as u32,
            coin_bias,
            max_interactions: 1_000 * n as u64 * log_n as u64,
            tail_margin: 10 * n as u64 * log_n as u64,
            scaled: false,
        })
    }

    pub fn with_name_space(mut self, name_space: u64) -> Result<Self> {
        if name_space < self.n as u64 {
            return Err(SimError::InvalidParams {
                name: "name_space",
                reason: format!("{name_space} is smaller than n = {}", self.n),
            });
        }
        self.scaled |= name_space != self.name_space;
        self.name_space = name_space;
        Ok(self)
    }

    /// Overrides the reset and clock ceilings (oracle-sized instances).
    pub fn with_ceilings(mut self, r_max: u32, d_max: u32, c_max: u32) -> Result<Self> {
        for (name, v) in [("r_max", r_max), ("d_max", d_max), ("c_max", c_max)] {
            if v == 0 {
                return Err(SimError::InvalidParams {
                    name,
                    reason: "ceilings must be at least 1".into(),
                });
            }
        }
        self.scaled |= (r_max, d_max, c_max) != (self.r_max, self.d_max, self.c_max);
        self.r_max = r_max;
        self.d_max = d_max;
        self.c_max = c_max;
        Ok(self)
    }

    pub fn with_max_interactions(mut self, max_interactions: u64) -> Self {
        self.max_interactions = max_interactions;
        self
    }

    pub fn with_tail_margin(mut self, tail_margin: u64) -> Self {
        self.tail_margin = tail_margin;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: &str| {
            Err(SimError::InvalidParams {
                name,
                reason: reason.to_string(),
            })
        };
        if self.n < 2 {
            return Err(SimError::InvalidPopulation(self.n));
        }
        if self.name_space < self.n as u64 {
            return bad("name_space", "must be at least n");
        }
        if self.r_max == 0 || self.d_max == 0 || self.c_max == 0 || self.error_init == 0 {
            return bad("ceilings", "must be at least 1");
        }
        if !(self.coin_bias > 0.0 && self.coin_bias <= 1.0) {
            return bad("coin_bias", "must lie in (0, 1]");
        }
        Ok(())
    }
}
