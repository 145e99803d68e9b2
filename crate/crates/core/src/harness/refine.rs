//! Fixed-seed reruns on successively refined grids sharing the coarse noise.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::harness::config::ExperimentConfig;
use crate::harness::stats::{mean_se, wilson_interval, Z95};
use crate::harness::sweep::parallel_map;
use crate::noise::NoiseGrid;
use crate::solver::{run_with_noise, PathRecord};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineLevel {
    pub level: u32,
    pub nx: usize,
    pub n_paths: usize,
    pub n_hit: usize,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub mean_singular_integral: f64,
    pub se_singular_integral: f64,
    pub invalid_count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefineTable {
    pub alpha: f64,
    pub levels: Vec<RefineLevel>,
    /// `records[level][path]`
    pub records: Vec<Vec<PathRecord>>,
}

impl RefineTable {
    /// Fraction of paths whose singular integrals at every level lie within
    /// `tol` (relative) of the coarsest level.
    pub fn singular_agreement(&self, tol: f64) -> f64 {
        let Some(base) = self.records.first() else { return 0.0 };
        let agree = (0..base.len())
            .filter(|&i| {
                let s0 = base[i].singular_integral;
                self.records.iter().all(|level| {
                    let s = level[i].singular_integral;
                    !level[i].invalid && s.is_finite() && (s - s0).abs() <= tol * s0.abs()
                })
            })
            .count();
        agree as f64 / base.len().max(1) as f64
    }
}

/// Runs the configured seeds at `nx * 2^l` for `l = 0..=levels`, each with
/// noise refined from the coarse field of the same seed.
pub fn refine_study(config: &ExperimentConfig, alpha: f64, levels: u32, workers: usize) -> Result<RefineTable> {
    let coarse = config.grid()?;
    let params = config.params(alpha)?;
    let opts = config.run_options();
    for level in 0..=levels {
        coarse.refined(level)?;
    }
    let mut table = RefineTable { alpha, levels: Vec::new(), records: Vec::new() };
    for level in 0..=levels {
        let grid = coarse.refined(level)?;
        let init = config.initial_data(&grid)?;
        let records = parallel_map(config.n_paths, workers, |i| {
            let noise = NoiseGrid::generate_refined(&coarse, config.seed(i), level)?;
            Ok(run_with_noise(&params, &init, &noise, &opts)?.record)
        })?;
        let valid: Vec<&PathRecord> = records.iter().filter(|r| !r.invalid).collect();
        let n_hit = valid.iter().filter(|r| r.hit).count();
        let (ci_lo, ci_hi) = wilson_interval(n_hit, valid.len(), Z95);
        let sing: Vec<f64> = valid.iter().map(|r| r.singular_integral).collect();
        let (mean_s, se_s) = mean_se(&sing);
        table.levels.push(RefineLevel {
            level,
            nx: grid.nx(),
            n_paths: records.len(),
            n_hit,
            p_hat: if valid.is_empty() { f64::NAN } else { n_hit as f64 / valid.len() as f64 },
            ci_lo,
            ci_hi,
            mean_singular_integral: mean_s,
            se_singular_integral: se_s,
            invalid_count: records.len() - valid.len(),
        });
        table.records.push(records);
    }
    Ok(table)
}
