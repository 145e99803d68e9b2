//! Light-cone drift integrals and the Duhamel split `u = V + D + N`.

use serde::{Deserialize, Serialize};

use crate::circle_kernel::{cone_members, dalembert_node, InitialData, LightCone};
use crate::error::{Error, Result};
use crate::grid::{Field2, GridSpec};
use crate::noise::{stochastic_convolution, CounterRng, NoiseGrid, Weight};
use crate::solver::ModelParams;

/// Stream tag for the interior-point sampler.
const SAMPLER_STREAM: u32 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftIntegral {
    pub value: f64,
    /// Cone nodes where the field sat at or below the floor `1/N`.
    pub truncated: usize,
}

/// `sum (u v 1/N)^{-alpha} dt dx` over the nodes of the open backward cone of
/// `(m, k)`, counting wrapped copies with multiplicity.
pub fn drift_integral(history: &Field2, grid: &GridSpec, m: usize, k: usize, params: &ModelParams) -> Result<DriftIntegral> {
    if m >= history.rows() {
        return Err(Error::HistoryTooShort { available: history.rows(), required: m + 1 });
    }
    if history.cols() != grid.nx() {
        return Err(Error::Shape { expected: grid.nx().to_string(), found: history.cols().to_string() });
    }
    let floor = params.floor();
    let mut value = 0.0;
    let mut truncated = 0;
    for (n, j) in cone_members(&LightCone::at_node(grid, m, k), grid) {
        let u = history.get(n, j);
        if u <= floor {
            truncated += 1;
        }
        value += params.truncated_drift(u);
    }
    Ok(DriftIntegral { value: value * grid.cell_area(), truncated })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeReport {
    pub apex: (usize, usize),
    pub apex_integral: f64,
    pub samples: usize,
    pub violations: usize,
    /// No interior node exists, so the check holds trivially.
    pub vacuous: bool,
}

/// Samples interior nodes `(n, j)` of the cone of `(m, k)` with `n >= 1` and
/// counts those whose own drift integral is not strictly smaller.
pub fn cone_monotonicity_check(
    history: &Field2,
    grid: &GridSpec,
    apex: (usize, usize),
    samples: usize,
    params: &ModelParams,
    seed: u64,
) -> Result<ConeReport> {
    let (m, k) = apex;
    let outer = drift_integral(history, grid, m, k, params)?;
    let interior: Vec<(usize, usize)> = cone_members(&LightCone::at_node(grid, m, k), grid)
        .into_iter()
        .filter(|&(n, _)| n >= 1)
        .collect();
    if interior.is_empty() {
        return Ok(ConeReport { apex, apex_integral: outer.value, samples: 0, violations: 0, vacuous: true });
    }
    let rng = CounterRng::new(seed);
    let mut violations = 0;
    for i in 0..samples {
        let b = rng.block([i as u32, m as u32, k as u32, SAMPLER_STREAM]);
        let (n, j) = interior[b[0] as usize % interior.len()];
        let inner = drift_integral(history, grid, n, j, params)?;
        if !(inner.value < outer.value) {
            violations += 1;
        }
    }
    Ok(ConeReport { apex, apex_integral: outer.value, samples, violations, vacuous: false })
}

/// `V`, `D` and `N` sampled at requested nodes next to the field itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftDecomposition {
    pub points: Vec<(usize, usize)>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub d: Vec<f64>,
    pub nf: Vec<f64>,
}

impl DriftDecomposition {
    /// `max |u - (V + D + N)|`
    pub fn closure_error(&self) -> f64 {
        (0..self.points.len())
            .map(|i| (self.u[i] - self.v[i] - self.d[i] - self.nf[i]).abs())
            .fold(0.0, f64::max)
    }
}

/// Splits the recorded field at `points` into the free wave `V`, the drift
/// term `D = 1/2 * drift_integral` (the kernel carries the factor 1/2), and
/// the stochastic convolution `N` with integrand `g` of the cell values.
pub fn decompose(
    history: &Field2,
    noise: &NoiseGrid,
    init: &InitialData,
    params: &ModelParams,
    points: &[(usize, usize)],
) -> Result<DriftDecomposition> {
    let grid = noise.spec();
    let nx = grid.nx();
    let rows = history.rows().saturating_sub(1).min(grid.nt());
    let g_cells = Field2::from_fn(rows, nx, |n, c| params.g(0.5 * (history.get(n, c) + history.get(n, (c + 1) % nx))));
    let mut out = DriftDecomposition {
        points: points.to_vec(),
        u: Vec::with_capacity(points.len()),
        v: Vec::with_capacity(points.len()),
        d: Vec::with_capacity(points.len()),
        nf: Vec::with_capacity(points.len()),
    };
    for &(m, k) in points {
        if m >= history.rows() {
            return Err(Error::HistoryTooShort { available: history.rows(), required: m + 1 });
        }
        out.u.push(history.get(m, k));
        out.v.push(dalembert_node(init, grid, m, k)?);
        out.d.push(if params.drift_enabled { 0.5 * drift_integral(history, grid, m, k, params)?.value } else { 0.0 });
        out.nf.push(stochastic_convolution(noise, Weight::Cells(&g_cells), m, k)?);
    }
    Ok(out)
}
