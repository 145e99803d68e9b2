//! Hölder exponents from the scaling of `p`-th moments of increments.
//!
//! For a field with `E|u(z + h) - u(z)|^p ~ C h^{p beta}` the slope of
//! `log E|Delta|^p` against `log h` is `p beta`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Field2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Along rows (columns are independent samples).
    Time,
    /// Along columns, periodically.
    Space,
    /// Along the diagonal `(n, j) -> (n + h, j + h)`.
    Joint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderEstimate {
    pub beta_hat: f64,
    pub stderr: f64,
    pub lags_used: Vec<usize>,
    pub direction: Direction,
    pub moment: f64,
    /// `Y` in `(E|Delta|^p)^{1/p} ~ Y (lag * spacing)^beta`.
    pub constant: f64,
}

/// Up to twelve distinct log-spaced integer lags in `[2, extent / 8]`.
pub fn log_spaced_lags(extent: usize) -> Vec<usize> {
    let hi = extent / 8;
    if hi < 2 {
        return Vec::new();
    }
    let count = 12usize;
    let (a, b) = (2f64.ln(), (hi as f64).ln());
    let mut lags: Vec<usize> = (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp().round() as usize)
        .collect();
    lags.dedup();
    lags
}

fn extent(field: &Field2, direction: Direction) -> usize {
    match direction {
        Direction::Time => field.rows(),
        Direction::Space => field.cols(),
        Direction::Joint => field.rows().min(field.cols()),
    }
}

/// Mean of `|Delta|^p` over all increments at lag `h`, with the pair count.
fn increment_moment(fields: &[&Field2], direction: Direction, h: usize, p: f64) -> (f64, usize) {
    let mut sum = 0.0;
    let mut count = 0usize;
    for f in fields {
        let (rows, cols) = (f.rows(), f.cols());
        match direction {
            Direction::Time => {
                for n in 0..rows.saturating_sub(h) {
                    for (a, b) in f.row(n).iter().zip(f.row(n + h)) {
                        sum += (b - a).abs().powf(p);
                        count += 1;
                    }
                }
            }
            Direction::Space => {
                for n in 0..rows {
                    let r = f.row(n);
                    for j in 0..cols {
                        sum += (r[(j + h) % cols] - r[j]).abs().powf(p);
                        count += 1;
                    }
                }
            }
            Direction::Joint => {
                for n in 0..rows.saturating_sub(h) {
                    let (r0, r1) = (f.row(n), f.row(n + h));
                    for j in 0..cols {
                        sum += (r1[(j + h) % cols] - r0[j]).abs().powf(p);
                        count += 1;
                    }
                }
            }
        }
    }
    (if count > 0 { sum / count as f64 } else { 0.0 }, count)
}

/// Least-squares fit of `log E|Delta|^p` on `log lag`, pooled over `fields`.
///
/// Lags outside `[2, extent / 8]` or with a vanishing moment are dropped;
/// at least four must remain. `spacing` converts lags to physical units for
/// the constant.
pub fn holder_estimate(fields: &[&Field2], direction: Direction, lags: &[usize], p: f64, spacing: f64) -> Result<HolderEstimate> {
    if !(p > 0.0) {
        return Err(Error::Domain(format!("moment must be positive, got {p}")));
    }
    let ext = fields.iter().map(|f| extent(f, direction)).min().unwrap_or(0);
    let mut sorted: Vec<usize> = lags.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut used = Vec::new();
    for &h in &sorted {
        if h < 2 || h > ext / 8 {
            continue;
        }
        let (m, count) = increment_moment(fields, direction, h, p);
        if count == 0 || !(m > 0.0) || !m.is_finite() {
            continue;
        }
        xs.push((h as f64).ln());
        ys.push(m.ln());
        used.push(h);
    }
    if used.len() < 4 {
        return Err(Error::TooFewLags(used.len()));
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let slope_se = (rss / (k - 2.0) / sxx).sqrt();
    let beta = slope / p;
    Ok(HolderEstimate {
        beta_hat: beta,
        stderr: slope_se / p,
        lags_used: used,
        direction,
        moment: p,
        constant: (intercept / p).exp() * spacing.powf(-beta),
    })
}
