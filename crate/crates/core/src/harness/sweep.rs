//! Batches of independent paths and their per-alpha summaries.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::stats::{wilson_interval, Z95};
use crate::solver::{run_path, PathRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub n_paths: usize,
    pub n_hit: usize,
    /// `n_hit` over the valid paths.
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    /// Mean `tau_hat` among hits; NaN when nothing hit.
    pub mean_tau: f64,
    pub invalid_count: usize,
}

impl SweepRow {
    /// Summary of one batch; invalid paths are counted but excluded.
    pub fn from_records(alpha: f64, records: &[PathRecord]) -> Self {
        let invalid_count = records.iter().filter(|r| r.invalid).count();
        let valid = records.len() - invalid_count;
        let taus: Vec<f64> = records.iter().filter(|r| !r.invalid && r.hit).map(|r| r.tau_hat).collect();
        let n_hit = taus.len();
        let (ci_lo, ci_hi) = wilson_interval(n_hit, valid, Z95);
        Self {
            alpha,
            n_paths: records.len(),
            n_hit,
            p_hat: if valid > 0 { n_hit as f64 / valid as f64 } else { f64::NAN },
            ci_lo,
            ci_hi,
            mean_tau: if n_hit > 0 { taus.iter().sum::<f64>() / n_hit as f64 } else { f64::NAN },
            invalid_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Per-path records, grouped by alpha in the order of `rows`.
    pub paths: Vec<PathRecord>,
}

impl SweepResult {
    pub fn invalid_fraction(&self) -> f64 {
        let total: usize = self.rows.iter().map(|r| r.n_paths).sum();
        let bad: usize = self.rows.iter().map(|r| r.invalid_count).sum();
        if total == 0 {
            0.0
        } else {
            bad as f64 / total as f64
        }
    }
}

/// Runs `f(i)` for `i in 0..n` on a pool of `workers` threads, returning the
/// results in index order.
pub fn parallel_map<T, F>(n: usize, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    pool.install(|| (0..n).into_par_iter().map(&f).collect())
}

/// `n_paths` paths at one alpha with seeds `base_seed + i`.
pub fn run_batch(config: &ExperimentConfig, alpha: f64, workers: usize) -> Result<Vec<PathRecord>> {
    let grid = config.grid()?;
    let params = config.params(alpha)?;
    let init = config.initial_data(&grid)?;
    let opts = config.run_options();
    parallel_map(config.n_paths, workers, |i| {
        Ok(run_path(&params, &init, &grid, config.seed(i), &opts)?.record)
    })
}

/// Runs every alpha of `config.alpha_list` on the same seeds.
pub fn run_sweep(config: &ExperimentConfig, workers: usize) -> Result<SweepResult> {
    let mut rows = Vec::with_capacity(config.alpha_list.len());
    let mut paths = Vec::new();
    for &alpha in &config.alpha_list {
        let records = run_batch(config, alpha, workers)?;
        rows.push(SweepRow::from_records(alpha, &records));
        paths.extend(records);
    }
    Ok(SweepResult { rows, paths })
}
