//! Girsanov densities between the drifted and drift-free equations.
//!
//! Simulating the drift-free equation with noise `W` and weighting the path by
//! `exp(sum h W - 1/2 sum h^2 dt dx)` reproduces expectations under the
//! drifted equation, as long as the shift `h = f / g` is read off the path
//! predictably. The solver applies half of the drift on its Taylor start, so
//! row 0 of the path shift carries weight 1/2.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::grid::Field2;
use crate::noise::{DriftShift, NoiseGrid};
use crate::solver::{ModelParams, PathRecord};

/// `h(r) = r^{-alpha} / g(r)` for `r > 0` and `0` at `r = 0`.
pub fn drift_shift_h(r: f64, params: &ModelParams) -> Result<f64> {
    if !(r >= 0.0) {
        return domain(format!("shift argument must be non-negative, got {r}"));
    }
    if r == 0.0 {
        return Ok(0.0);
    }
    Ok(r.powf(-params.alpha) / params.g(r))
}

/// Per-cell shift that turns the drift-free scheme into the drifted one along
/// a recorded history: `w_n (rho v 1/N)^{-alpha} / g(rho)` on `rows` rows,
/// `w_0 = 1/2` and `w_n = 1` after. Zero when `params` has the drift off.
pub fn path_shift(history: &Field2, params: &ModelParams, rows: usize) -> Result<DriftShift> {
    if history.rows() < rows {
        return Err(Error::HistoryTooShort { available: history.rows(), required: rows });
    }
    let nx = history.cols();
    let values = Field2::from_fn(rows, nx, |n, c| {
        if !params.drift_enabled {
            return 0.0;
        }
        let rho = 0.5 * (history.get(n, c) + history.get(n, (c + 1) % nx));
        let w = if n == 0 { 0.5 } else { 1.0 };
        w * params.truncated_drift(rho) / params.g(rho)
    });
    Ok(DriftShift::from_field(values))
}

/// Integrability budget `m` and horizon `T` defining `T_m = tau ^ alpha_m ^ T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StopSpec {
    pub m: f64,
    pub horizon: f64,
}

impl StopSpec {
    pub fn new(m: f64, horizon: f64) -> Result<Self> {
        if !(m > 0.0) || !(horizon > 0.0) {
            return Err(Error::Config(format!("stop budget and horizon must be positive, got m = {m}, T = {horizon}")));
        }
        Ok(Self { m, horizon })
    }
}

/// Grid index of `T_m`: the first of the hit step, the first `k` whose
/// singular integral over rows `0..k` exceeds `m`, and the horizon.
pub fn stopped_step(record: &PathRecord, stop: &StopSpec, dt: f64) -> usize {
    let horizon = ((stop.horizon / dt) + 1e-9).floor() as usize;
    let mut k = horizon.min(record.last_step);
    if let Some(h) = record.hit_step {
        k = k.min(h);
    }
    if let Some(a) = record.singular_trace.iter().position(|&s| s > stop.m) {
        k = k.min(a);
    }
    k
}

pub fn stopped_horizon(record: &PathRecord, stop: &StopSpec, dt: f64) -> f64 {
    stopped_step(record, stop, dt) as f64 * dt
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GirsanovWeight {
    pub log_density: f64,
    /// `1/2 sum h^2 dt dx`
    pub novikov_half_integral: f64,
    pub stop_time_used: f64,
    pub stop_step: usize,
}

/// `sum h W - 1/2 sum h^2 dt dx` over rows `0..stop_step`.
pub fn log_density_for_shift(shift: &DriftShift, noise: &NoiseGrid, stop_step: usize) -> Result<GirsanovWeight> {
    let h = shift.values();
    let spec = noise.spec();
    if stop_step > spec.nt() {
        return Err(Error::HistoryTooShort { available: spec.nt(), required: stop_step });
    }
    if h.rows() < stop_step || h.cols() != spec.nx() {
        return Err(Error::Shape {
            expected: format!("at least {stop_step}x{}", spec.nx()),
            found: format!("{}x{}", h.rows(), h.cols()),
        });
    }
    let (mut lin, mut quad) = (0.0, 0.0);
    for n in 0..stop_step {
        for (hv, w) in h.row(n).iter().zip(noise.row(n)) {
            lin += hv * w;
            quad += hv * hv;
        }
    }
    let half = 0.5 * quad * spec.cell_area();
    Ok(GirsanovWeight {
        log_density: lin - half,
        novikov_half_integral: half,
        stop_time_used: spec.time(stop_step),
        stop_step,
    })
}

/// Density of the drifted law against the drift-free law, evaluated on a
/// drift-free path, up to `T_m`.
pub fn log_density(
    record: &PathRecord,
    history: &Field2,
    noise: &NoiseGrid,
    stop: &StopSpec,
    params: &ModelParams,
) -> Result<GirsanovWeight> {
    let k = stopped_step(record, stop, noise.spec().dt());
    let shift = path_shift(history, params, k)?;
    log_density_for_shift(&shift, noise, k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReweightEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub ess: f64,
    /// Effective sample size below 10.
    pub low_ess: bool,
}

/// `sum F_i exp(l_i) / n` with standard error `sd(F exp(l)) / sqrt(n)`.
pub fn reweight_estimate(values: &[f64], log_weights: &[f64]) -> Result<ReweightEstimate> {
    if values.len() != log_weights.len() {
        return Err(Error::Shape { expected: values.len().to_string(), found: log_weights.len().to_string() });
    }
    if values.is_empty() {
        return domain("reweighting needs at least one path");
    }
    if values.iter().chain(log_weights).any(|v| !v.is_finite()) {
        return domain("functional values and log-weights must be finite");
    }
    let n = values.len() as f64;
    let shift = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_weights.iter().map(|l| (l - shift).exp()).collect();
    let prod: Vec<f64> = values.iter().zip(&w).map(|(f, w)| f * w).collect();
    let mean_scaled = prod.iter().sum::<f64>() / n;
    let var_scaled = if values.len() > 1 {
        prod.iter().map(|p| (p - mean_scaled).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let scale = shift.exp();
    let sum_w: f64 = w.iter().sum();
    let sum_w2: f64 = w.iter().map(|v| v * v).sum();
    let ess = sum_w * sum_w / sum_w2;
    Ok(ReweightEstimate {
        mean: mean_scaled * scale,
        stderr: var_scaled.sqrt() * scale / n.sqrt(),
        ess,
        low_ess: ess < 10.0,
    })
}
