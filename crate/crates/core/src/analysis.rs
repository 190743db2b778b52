//! Baseline spreading processes under the uniform scheduler, summary
//! statistics and log-log scaling fits.

use serde::Serialize;

use crate::engine::pick_pair;
use crate::error::{Result, SimError};
use crate::rng::RngStream;

/// Interactions until a two-way epidemic started by one agent reaches all `n`.
pub fn epidemic_trial(n: usize, rng: &mut RngStream) -> Result<u64> {
    if n < 2 {
        return Err(SimError::InvalidPopulation(n));
    }
    let mut infected = vec![false; n];
    infected[0] = true;
    let mut count = 1;
    let mut t = 0u64;
    while count < n {
        let (i, j) = pick_pair(rng, n)?;
        t += 1;
        if infected[i] != infected[j] {
            infected[i] = true;
            infected[j] = true;
            count += 1;
        }
    }
    Ok(t)
}

/// Outcome of one roll call: `total` interactions until every agent holds
/// every ID, and for each ID the interaction at which all agents held it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RollCall {
    pub total: u64,
    pub per_id: Vec<u64>,
}

/// `n` simultaneous epidemics, one per agent ID, merged by pairwise union.
pub fn roll_call(n: usize, rng: &mut RngStream) -> Result<RollCall> {
    if n < 2 {
        return Err(SimError::InvalidPopulation(n));
    }
    let words = n.div_ceil(64);
    let mut sets = vec![0u64; n * words];
    for i in 0..n {
        sets[i * words + i / 64] |= 1 << (i % 64);
    }
    let mut holders = vec![1usize; n];
    let mut per_id = vec![0u64; n];
    let mut complete_agents = 0usize;
    let mut t = 0u64;
    while complete_agents < n {
        let (i, j) = pick_pair(rng, n)?;
        t += 1;
        let mut before = [0u32; 2];
        let mut after = [0u32; 2];
        for w in 0..words {
            let (x, y) = (sets[i * words + w], sets[j * words + w]);
            let u = x | y;
            if u == x && u == y {
                before[0] += x.count_ones();
                before[1] += y.count_ones();
                after[0] += x.count_ones();
                after[1] += y.count_ones();
                continue;
            }
            for (k, (old, gained)) in [(x, u & !x), (y, u & !y)].into_iter().enumerate() {
                before[k] += old.count_ones();
                after[k] += u.count_ones();
                let mut bits = gained;
                while bits != 0 {
                    let id = w * 64 + bits.trailing_zeros() as usize;
                    holders[id] += 1;
                    if holders[id] == n {
                        per_id[id] = t;
                    }
                    bits &= bits - 1;
                }
            }
            sets[i * words + w] = u;
            sets[j * words + w] = u;
        }
        for k in 0..2 {
            if before[k] < n as u32 && after[k] == n as u32 {
                complete_agents += 1;
            }
        }
    }
    Ok(RollCall { total: t, per_id })
}

pub fn roll_call_trial(n: usize, rng: &mut RngStream) -> Result<u64> {
    roll_call(n, rng).map(|r| r.total)
}

/// Per-agent interaction counts over a window of `window` interactions.
pub fn interaction_counts(n: usize, window: u64, rng: &mut RngStream) -> Result<Vec<u64>> {
    let mut counts = vec![0u64; n];
    for _ in 0..window {
        let (i, j) = pick_pair(rng, n)?;
        counts[i] += 1;
        counts[j] += 1;
    }
    Ok(counts)
}

/// `H_k = 1 + 1/2 + ... + 1/k`.
pub fn harmonic(k: u64) -> f64 {
    // summed smallest terms first
    (1..=k).rev().map(|i| 1.0 / i as f64).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Least squares of `ln t` on `ln n`.
pub fn fit_loglog(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if let Some(&(n, t)) = points.iter().find(|&&(n, t)| !(n > 0.0 && t > 0.0)) {
        return Err(SimError::Domain(format!("log-log fit needs positive values, got ({n}, {t})")));
    }
    let mut ns: Vec<f64> = points.iter().map(|p| p.0).collect();
    ns.sort_by(f64::total_cmp);
    ns.dedup();
    if ns.len() < 3 {
        return Err(SimError::Domain(format!(
            "log-log fit needs at least 3 distinct n, got {}",
            ns.len()
        )));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        let sse: f64 = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (y - intercept - slope * x).powi(2))
            .sum();
        (1.0 - sse / syy).clamp(0.0, 1.0)
    };
    Ok(ScalingFit {
        slope,
        intercept,
        r_squared,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleSummary {
    pub count: usize,
    pub mean: f64,
    /// Unbiased sample variance, 0 for a single sample.
    pub variance: f64,
    pub min: f64,
    pub max: f64,
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
}

impl SampleSummary {
    pub fn std_error(&self) -> f64 {
        (self.variance / self.count as f64).sqrt()
    }
}

/// Nearest-rank quantile of sorted data: the `ceil(q * len)`-th smallest.
pub fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    let rank = (q * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

pub fn summarize(samples: &[f64]) -> Result<SampleSummary> {
    if samples.is_empty() {
        return Err(SimError::Domain("cannot summarize an empty sample".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let count = sorted.len();
    let mean = sorted.iter().sum::<f64>() / count as f64;
    let variance = if count > 1 {
        sorted.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64
    } else {
        0.0
    };
    Ok(SampleSummary {
        count,
        mean,
        variance,
        min: sorted[0],
        max: sorted[count - 1],
        p50: nearest_rank(&sorted, 0.5),
        p90: nearest_rank(&sorted, 0.9),
        p99: nearest_rank(&sorted, 0.99),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_values() {
        assert_eq!(harmonic(1), 1.0);
        assert_eq!(harmonic(2), 1.5);
        assert!((harmonic(4) - 25.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn two_agents_finish_at_once() {
        let mut rng = RngStream::new(4);
        for _ in 0..100 {
            assert_eq!(epidemic_trial(2, &mut rng).unwrap(), 1);
            assert_eq!(roll_call_trial(2, &mut rng).unwrap(), 1);
        }
        assert!(epidemic_trial(1, &mut rng).is_err());
    }

    #[test]
    fn roll_call_dominates_each_id() {
        let mut rng = RngStream::new(8);
        for n in [3, 17, 64, 130] {
            let r = roll_call(n, &mut rng).unwrap();
            assert_eq!(r.per_id.len(), n);
            assert!(r.per_id.iter().all(|&t| t >= 1 && t <= r.total));
            assert_eq!(r.per_id.iter().max(), Some(&r.total));
        }
    }

    #[test]
    fn exact_power_laws() {
        let pts: Vec<(f64, f64)> = [4.0, 8.0, 16.0, 32.0].iter().map(|&n| (n, 7.0 * n * n)).collect();
        let f = fit_loglog(&pts).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
        let pts: Vec<(f64, f64)> = [4.0, 8.0, 16.0].iter().map(|&n| (n, 5.0 * n)).collect();
        assert!((fit_loglog(&pts).unwrap().slope - 1.0).abs() < 1e-12);
    }

    #[test]
    fn n_log_n_calibration() {
        let pts: Vec<(f64, f64)> = (6..=12)
            .map(|e| {
                let n = (1u64 << e) as f64;
                (n, 3.0 * n * n.ln())
            })
            .collect();
        let s = fit_loglog(&pts).unwrap().slope;
        assert!(s > 1.05 && s < 1.25, "slope {s}");
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert!(fit_loglog(&[(2.0, 1.0), (3.0, 0.0), (4.0, 1.0)]).is_err());
        assert!(fit_loglog(&[(2.0, 1.0), (2.0, 2.0), (4.0, 1.0)]).is_err());
    }

    #[test]
    fn summaries() {
        let s = summarize(&[5.0]).unwrap();
        assert_eq!((s.mean, s.p50, s.variance), (5.0, 5.0, 0.0));
        assert_eq!(summarize(&[1.0, 2.0, 3.0, 4.0]).unwrap().mean, 2.5);
        let s = summarize(&[1.0, 1.0, 100.0]).unwrap();
        assert_eq!(s.p50, 1.0);
        assert_eq!(s.p99, 100.0);
        assert!(summarize(&[]).is_err());
    }
}
