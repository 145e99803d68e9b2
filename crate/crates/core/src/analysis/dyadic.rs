use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Field2, GridSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicCount {
    pub n: usize,
    pub k_sup: f64,
    /// `2^{-(1 - 2 eps) n}`
    pub lambda_n: f64,
    pub epsilon: f64,
    /// Lattice points with `v <= 2^{-n} K`.
    pub count: usize,
    pub lattice_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadicReport {
    pub counts: Vec<DyadicCount>,
    /// First level skipped because `lambda_n < dt`.
    pub capped_at: Option<usize>,
    /// `K` fell below the observed supremum.
    pub sup_exceeded: bool,
    /// `sum 2^{2 alpha (n+1)} K^{-2 alpha} count lambda_n 2 lambda_n`
    pub weighted_tail: f64,
}

/// Counts near-zero lattice points on the dyadic lattices
/// `{(i lambda_n, 2 l lambda_n)}` anchored at the origin, snapped to grid
/// nodes and restricted to rows before `hit_step`.
pub fn dyadic_counts(
    history: &Field2,
    grid: &GridSpec,
    k_sup: f64,
    epsilon: f64,
    alpha: f64,
    max_n: usize,
    hit_step: Option<usize>,
) -> Result<DyadicReport> {
    if !(epsilon > 0.0 && 2.0 * epsilon < 1.0 - alpha) {
        return Err(Error::Precondition(format!(
            "dyadic counts need 0 < 2 eps < 1 - alpha, got eps = {epsilon}, alpha = {alpha}"
        )));
    }
    if !(k_sup > 0.0) {
        return Err(Error::Domain(format!("K must be positive, got {k_sup}")));
    }
    if history.cols() != grid.nx() {
        return Err(Error::Shape { expected: grid.nx().to_string(), found: history.cols().to_string() });
    }
    let rows = hit_step.unwrap_or(history.rows()).min(history.rows());
    let sup = (0..rows).flat_map(|n| history.row(n).iter().copied()).fold(f64::NEG_INFINITY, f64::max);
    let mut report = DyadicReport { counts: Vec::new(), capped_at: None, sup_exceeded: sup > k_sup, weighted_tail: 0.0 };
    if rows == 0 {
        return Ok(report);
    }
    let t_max = grid.time(rows - 1);
    for n in 1..=max_n {
        let lambda = 2f64.powf(-(1.0 - 2.0 * epsilon) * n as f64);
        if lambda < grid.dt() {
            report.capped_at = Some(n);
            break;
        }
        let level = 2f64.powi(-(n as i32)) * k_sup;
        let times = (t_max / lambda + 1e-9).floor() as usize + 1;
        let spaces = (grid.length() / (2.0 * lambda) - 1e-9).ceil().max(1.0) as usize;
        let mut count = 0;
        for i in 0..times {
            let row = ((i as f64 * lambda / grid.dt()).round() as usize).min(rows - 1);
            for l in 0..spaces {
                let col = grid.wrap((l as f64 * 2.0 * lambda / grid.dx()).round() as isize);
                if history.get(row, col) <= level {
                    count += 1;
                }
            }
        }
        report.weighted_tail +=
            2f64.powf(2.0 * alpha * (n as f64 + 1.0)) * k_sup.powf(-2.0 * alpha) * count as f64 * lambda * 2.0 * lambda;
        report.counts.push(DyadicCount { n, k_sup, lambda_n: lambda, epsilon, count, lattice_size: times * spaces });
    }
    Ok(report)
}
