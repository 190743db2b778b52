//! Expected hitting times on the configuration graph.

use std::hash::Hash;

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SimError};
use crate::oracle::graph::ConfigGraph;

/// Dense elimination below this many unknowns, Gauss-Seidel above.
pub const DENSE_LIMIT: usize = 10_000;
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Silent,
    Correct,
}

/// Expected number of interactions from `start` until the first
/// configuration in the target set.
///
/// The residual `max |(I - Q) h - 1|` is required to stay below
/// [`RESIDUAL_TOLERANCE`] times `max(1, max h)`.
pub fn expected_hitting_time<S>(graph: &ConfigGraph<S>, start: &[S], target: Target) -> Result<f64>
where
    S: Clone + Eq + Hash,
{
    let s = graph
        .index_of(start)
        .ok_or_else(|| SimError::Domain("start configuration is not a node of the graph".into()))?;
    let in_target: &[bool] = match target {
        Target::Silent => &graph.silent,
        Target::Correct => &graph.correct,
    };
    if in_target[s] {
        return Ok(0.0);
    }
    let reach = graph.reachable_from(s, in_target);
    let good = graph.can_reach(in_target);
    if (0..graph.node_count()).any(|v| reach[v] && !good[v]) {
        return Err(SimError::Divergence);
    }

    let unknowns: Vec<usize> = (0..graph.node_count()).filter(|&v| reach[v] && !in_target[v]).collect();
    let mut local = vec![usize::MAX; graph.node_count()];
    for (i, &v) in unknowns.iter().enumerate() {
        local[v] = i;
    }
    let rows: Vec<Vec<(usize, f64)>> = unknowns
        .iter()
        .map(|&v| {
            graph
                .successors(v)
                .filter(|&(t, _)| local[t] != usize::MAX)
                .map(|(t, p)| (local[t], p))
                .collect()
        })
        .collect();

    let h = if unknowns.len() < DENSE_LIMIT {
        solve_dense(&rows)?
    } else {
        solve_gauss_seidel(&rows)?
    };
    let scale = h.iter().fold(1.0f64, |m, &x| m.max(x));
    let residual = residual(&rows, &h);
    if residual.is_nan() || residual > RESIDUAL_TOLERANCE * scale {
        return Err(SimError::SolverResidual { residual });
    }
    Ok(h[local[s]])
}

fn residual(rows: &[Vec<(usize, f64)>], h: &[f64]) -> f64 {
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            let qh: f64 = row.iter().map(|&(j, p)| p * h[j]).sum();
            (h[i] - qh - 1.0).abs()
        })
        .fold(0.0, f64::max)
}

fn solve_dense(rows: &[Vec<(usize, f64)>]) -> Result<Vec<f64>> {
    let m = rows.len();
    let mut a = DMatrix::<f64>::identity(m, m);
    for (i, row) in rows.iter().enumerate() {
        for &(j, p) in row {
            a[(i, j)] -= p;
        }
    }
    let b = DVector::from_element(m, 1.0);
    let x = a.lu().solve(&b).ok_or(SimError::Divergence)?;
    Ok(x.iter().copied().collect())
}

fn solve_gauss_seidel(rows: &[Vec<(usize, f64)>]) -> Result<Vec<f64>> {
    let m = rows.len();
    let mut h = vec![0.0; m];
    const MAX_SWEEPS: usize = 1_000_000;
    for sweep in 0..MAX_SWEEPS {
        for i in 0..m {
            let mut stay = 0.0;
            let mut acc = 1.0;
            for &(j, p) in &rows[i] {
                if j == i {
                    stay += p;
                } else {
                    acc += p * h[j];
                }
            }
            h[i] = acc / (1.0 - stay);
        }
        if sweep % 16 == 15 {
            let scale = h.iter().fold(1.0f64, |a, &x| a.max(x));
            if residual(rows, &h) <= 0.1 * RESIDUAL_TOLERANCE * scale {
                return Ok(h);
            }
        }
    }
    Err(SimError::SolverResidual {
        residual: residual(rows, &h),
    })
}
