//! Leapfrog marching of the truncated equation at unit CFL number.
//!
//! With `rho_c = (u_c + u_{c+1}) / 2` the value carried by cell `c`, one step
//! reads
//!
//! ```text
//! u^{n+1}_j = u^n_{j+1} + u^n_{j-1} - u^{n-1}_j
//!           + (s_{j-1} + s_j) / 2,     s_c = dt^2 f(rho_c) + g(rho_c) W(n, c)
//! ```
//!
//! where `f(r) = (r v 1/N)^{-alpha}` when the drift is on. Each increment
//! enters the two nodes bordering its cell, so the discrete solution is the
//! cell-centre Duhamel sum and its domain of dependence is the light cone.

use serde::{Deserialize, Serialize};

use crate::circle_kernel::InitialData;
use crate::error::{Error, Result};
use crate::grid::{Field2, GridSpec};
use crate::noise::{CounterRng, NoiseGrid, NOISE_STREAM};

/// Noise coefficient `g`, bounded above and below by positive constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Diffusion {
    Constant(f64),
    /// `lo + (hi - lo) (1 + tanh y) / 2`
    Tanh { lo: f64, hi: f64 },
}

impl Diffusion {
    #[inline]
    pub fn eval(&self, y: f64) -> f64 {
        match *self {
            Diffusion::Constant(c) => c,
            Diffusion::Tanh { lo, hi } => lo + (hi - lo) * 0.5 * (1.0 + y.tanh()),
        }
    }

    /// `(c_g, C_g)`
    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            Diffusion::Constant(c) => (c, c),
            Diffusion::Tanh { lo, hi } => (lo, hi),
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match *self {
            Diffusion::Constant(_) => 0.0,
            Diffusion::Tanh { lo, hi } => 0.5 * (hi - lo),
        }
    }

    /// Checks the declared bounds and spot-checks them on 1000 points.
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.bounds();
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
            return Err(Error::Config(format!("diffusion bounds must satisfy 0 < c_g <= C_g, got ({lo}, {hi})")));
        }
        for i in 0..1000 {
            let y = -50.0 + 100.0 * i as f64 / 999.0;
            let g = self.eval(y);
            if !(g >= lo && g <= hi) {
                return Err(Error::Config(format!("g({y}) = {g} leaves [{lo}, {hi}]")));
            }
        }
        Ok(())
    }
}

/// Drift exponent, noise coefficient and truncation level `N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub alpha: f64,
    pub diffusion: Diffusion,
    pub trunc_level: u64,
    pub drift_enabled: bool,
}

impl ModelParams {
    pub fn new(alpha: f64, diffusion: Diffusion, trunc_level: u64, drift_enabled: bool) -> Result<Self> {
        let p = Self { alpha, diffusion, trunc_level, drift_enabled };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha > 0.0) {
            return Err(Error::Config(format!("alpha must be positive, got {}", self.alpha)));
        }
        if self.trunc_level < 1 {
            return Err(Error::Config("truncation level N must be at least 1".into()));
        }
        self.diffusion.validate()
    }

    pub fn floor(&self) -> f64 {
        1.0 / self.trunc_level as f64
    }

    /// `(r v 1/N)^{-alpha}`, regardless of whether the drift is switched on.
    #[inline]
    pub fn truncated_drift(&self, r: f64) -> f64 {
        r.max(self.floor()).powf(-self.alpha)
    }

    /// Drift actually applied by the scheme.
    #[inline]
    pub fn drift(&self, r: f64) -> f64 {
        if self.drift_enabled {
            self.truncated_drift(r)
        } else {
            0.0
        }
    }

    #[inline]
    pub fn g(&self, r: f64) -> f64 {
        self.diffusion.eval(r)
    }
}

/// Cell values `rho_c = (u_c + u_{c+1}) / 2`.
pub fn cell_values(u: &[f64], out: &mut [f64]) {
    let nx = u.len();
    for c in 0..nx {
        out[c] = 0.5 * (u[c] + u[(c + 1) % nx]);
    }
}

/// Two consecutive time slices and the cemetery flag.
#[derive(Debug, Clone, PartialEq)]
pub struct PathState {
    prev: Vec<f64>,
    curr: Vec<f64>,
    step_index: usize,
    dead: bool,
    source: Vec<f64>,
}

impl PathState {
    pub fn prev(&self) -> &[f64] {
        &self.prev
    }

    pub fn curr(&self) -> &[f64] {
        &self.curr
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    pub fn is_dead(&self) -> bool {
        self.dead
    }

    /// Sends the path to the cemetery; every later step is refused.
    pub fn kill(&mut self) {
        self.dead = true;
    }

    /// Fills `source` with `weight * dt^2 f(rho_c) + g(rho_c) W(n, c)`.
    fn fill_source(&mut self, params: &ModelParams, spec: &GridSpec, noise_row: &[f64], drift_weight: f64) {
        let dt2 = spec.dt() * spec.dt();
        let nx = self.curr.len();
        for (c, (s, &w)) in self.source.iter_mut().zip(noise_row).enumerate() {
            let rho = 0.5 * (self.curr[c] + self.curr[(c + 1) % nx]);
            *s = drift_weight * dt2 * params.drift(rho) + params.g(rho) * w;
        }
    }

    /// Advances one step in place, reusing the old `prev` buffer.
    pub fn advance(&mut self, params: &ModelParams, spec: &GridSpec, noise_row: &[f64]) -> Result<()> {
        if self.dead {
            return Err(Error::DeadState);
        }
        if self.step_index >= spec.nt() {
            return Err(Error::HistoryTooShort { available: spec.nt(), required: self.step_index + 1 });
        }
        let nx = self.curr.len();
        if noise_row.len() != nx {
            return Err(Error::Shape { expected: nx.to_string(), found: noise_row.len().to_string() });
        }
        self.fill_source(params, spec, noise_row, 1.0);
        let (u, s) = (&self.curr, &self.source);
        for j in 0..nx {
            let left = if j == 0 { nx - 1 } else { j - 1 };
            let right = if j + 1 == nx { 0 } else { j + 1 };
            self.prev[j] = u[right] + u[left] - self.prev[j] + 0.5 * (s[left] + s[j]);
        }
        std::mem::swap(&mut self.prev, &mut self.curr);
        self.step_index += 1;
        Ok(())
    }
}

/// Second-order start: `u^0 = u0` and the Taylor step to `u^1`.
pub fn first_step_init(init: &InitialData, params: &ModelParams, spec: &GridSpec, noise: &NoiseGrid) -> Result<PathState> {
    first_step_with_row(init, params, spec, noise.row(0))
}

fn first_step_with_row(init: &InitialData, params: &ModelParams, spec: &GridSpec, noise_row: &[f64]) -> Result<PathState> {
    init.check_grid(spec)?;
    let nx = spec.nx();
    let u0 = init.u0();
    let u1 = init.u1();
    let mut state = PathState {
        prev: u0.to_vec(),
        curr: u0.to_vec(),
        step_index: 0,
        dead: false,
        source: vec![0.0; nx],
    };
    state.fill_source(params, spec, noise_row, 0.5);
    let dt = spec.dt();
    let s = &state.source;
    let mut next = vec![0.0; nx];
    for j in 0..nx {
        let left = if j == 0 { nx - 1 } else { j - 1 };
        let right = if j + 1 == nx { 0 } else { j + 1 };
        next[j] = u0[j] + 0.5 * (u0[right] - 2.0 * u0[j] + u0[left]) + dt * u1[j] + 0.5 * (s[left] + s[j]);
    }
    state.curr = next;
    state.step_index = 1;
    Ok(state)
}

/// One leapfrog step reading row `state.step_index` of `noise`.
pub fn step(state: &mut PathState, params: &ModelParams, noise: &NoiseGrid, spec: &GridSpec) -> Result<()> {
    if state.dead {
        return Err(Error::DeadState);
    }
    if state.step_index >= noise.spec().nt() {
        return Err(Error::HistoryTooShort { available: noise.spec().nt(), required: state.step_index + 1 });
    }
    state.advance(params, spec, noise.row(state.step_index))
}

/// Why marching stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Horizon,
    Hit,
    Invalid,
}

/// Options for [`run_path`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    /// The path is declared hit once `min_x u <= hit_level`.
    pub hit_level: f64,
    /// Truncation levels `N` whose crossing times `tau_N` are recorded.
    pub tau_levels: Vec<u64>,
    pub record_history: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { hit_level: 0.0, tau_levels: Vec::new(), record_history: false }
    }
}

/// Outcome of one path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub seed: u64,
    pub alpha: f64,
    pub hit: bool,
    /// First grid time with `min u <= hit_level`, or infinity.
    pub tau_hat: f64,
    pub hit_step: Option<usize>,
    /// `(N, tau_N)` with `tau_N` the first grid time with `min u <= 1/N`.
    pub tau_n_hats: Vec<(u64, f64)>,
    /// `min_x u(t_n, x)` for every row reached.
    pub minima: Vec<f64>,
    /// `sum (rho v 1/N)^{-2 alpha} dt dx` over the rows used before the stop.
    pub singular_integral: f64,
    /// `singular_trace[k]` is the integral over rows `0..k`.
    pub singular_trace: Vec<f64>,
    /// Girsanov log-density towards the other drift mode (see the girsanov module).
    pub log_weight: f64,
    pub invalid: bool,
    pub stop: StopReason,
    /// Last row index reached.
    pub last_step: usize,
}

impl PathRecord {
    pub fn min_over_run(&self) -> f64 {
        self.minima.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// A finished path and, on request, its field history (rows `0..=last_step`).
#[derive(Debug, Clone, PartialEq)]
pub struct PathRun {
    pub record: PathRecord,
    pub history: Option<Field2>,
}

enum Rows<'a> {
    Grid(&'a NoiseGrid),
    Lazy { rng: CounterRng, sigma: f64, buf: Vec<f64> },
}

impl Rows<'_> {
    fn row(&mut self, n: usize) -> &[f64] {
        match self {
            Rows::Grid(g) => g.row(n),
            Rows::Lazy { rng, sigma, buf } => {
                for (j, w) in buf.iter_mut().enumerate() {
                    *w = *sigma * rng.normal([j as u32, n as u32, 0, NOISE_STREAM]);
                }
                buf
            }
        }
    }
}

/// Marches one path with noise drawn on the fly from `seed`.
///
/// Increments are identical to `NoiseGrid::generate(spec, seed)`.
pub fn run_path(params: &ModelParams, init: &InitialData, spec: &GridSpec, seed: u64, opts: &RunOptions) -> Result<PathRun> {
    let rows = Rows::Lazy { rng: CounterRng::new(seed), sigma: spec.cell_area().sqrt(), buf: vec![0.0; spec.nx()] };
    march(params, init, spec, seed, opts, rows)
}

/// Marches one path against a given noise field.
pub fn run_with_noise(params: &ModelParams, init: &InitialData, noise: &NoiseGrid, opts: &RunOptions) -> Result<PathRun> {
    march(params, init, noise.spec(), noise.seed(), opts, Rows::Grid(noise))
}

struct Tracker<'a> {
    params: &'a ModelParams,
    opts: &'a RunOptions,
    spec: &'a GridSpec,
    record: PathRecord,
    history: Option<Field2>,
    rho: Vec<f64>,
}

impl Tracker<'_> {
    /// Records row `n`; returns `true` when marching must stop.
    fn observe(&mut self, n: usize, u: &[f64]) -> Result<bool> {
        let t = self.spec.time(n);
        self.record.last_step = n;
        if let Some(h) = self.history.as_mut() {
            h.push_row(u)?;
        }
        if u.iter().any(|v| !v.is_finite()) {
            self.record.invalid = true;
            self.record.stop = StopReason::Invalid;
            self.record.minima.push(f64::NAN);
            return Ok(true);
        }
        let min = u.iter().copied().fold(f64::INFINITY, f64::min);
        self.record.minima.push(min);
        for (level, tau) in self.record.tau_n_hats.iter_mut() {
            if tau.is_infinite() && min <= 1.0 / *level as f64 {
                *tau = t;
            }
        }
        if min <= self.opts.hit_level {
            self.record.hit = true;
            self.record.tau_hat = t;
            self.record.hit_step = Some(n);
            self.record.stop = StopReason::Hit;
            return Ok(true);
        }
        Ok(false)
    }

    /// Accumulates the singular integral and the log-weight over row `n`.
    fn accumulate(&mut self, n: usize, u: &[f64], noise_row: &[f64]) {
        let p = self.params;
        let area = self.spec.cell_area();
        cell_values(u, &mut self.rho);
        let two_alpha = -2.0 * p.alpha;
        let floor = p.floor();
        let row_weight = if n == 0 { 0.5 } else { 1.0 };
        let (mut sing, mut lin, mut quad) = (0.0, 0.0, 0.0);
        for (&rho, &w) in self.rho.iter().zip(noise_row) {
            let r = rho.max(floor);
            sing += r.powf(two_alpha);
            let h = row_weight * r.powf(-p.alpha) / p.g(rho);
            lin += h * w;
            quad += h * h;
        }
        self.record.singular_integral += sing * area;
        self.record.singular_trace.push(self.record.singular_integral);
        // drift-free: density of the drifted law; drift on: of the drift-free law
        self.record.log_weight += if p.drift_enabled { -lin - 0.5 * quad * area } else { lin - 0.5 * quad * area };
    }
}

fn march(params: &ModelParams, init: &InitialData, spec: &GridSpec, seed: u64, opts: &RunOptions, mut rows: Rows<'_>) -> Result<PathRun> {
    params.validate()?;
    init.check_grid(spec)?;
    if params.drift_enabled {
        init.require_positive()?;
    }
    let mut levels = opts.tau_levels.clone();
    levels.sort_unstable();
    levels.dedup();
    let mut tracker = Tracker {
        params,
        opts,
        spec,
        record: PathRecord {
            seed,
            alpha: params.alpha,
            hit: false,
            tau_hat: f64::INFINITY,
            hit_step: None,
            tau_n_hats: levels.iter().map(|&l| (l, f64::INFINITY)).collect(),
            minima: Vec::with_capacity(spec.nt() + 1),
            singular_integral: 0.0,
            singular_trace: vec![0.0],
            log_weight: 0.0,
            invalid: false,
            stop: StopReason::Horizon,
            last_step: 0,
        },
        history: opts.record_history.then(|| Field2::zeros(0, spec.nx())),
        rho: vec![0.0; spec.nx()],
    };

    if tracker.observe(0, init.u0())? {
        return Ok(PathRun { record: tracker.record, history: tracker.history });
    }
    let row0 = rows.row(0).to_vec();
    tracker.accumulate(0, init.u0(), &row0);
    let mut state = first_step_with_row(init, params, spec, &row0)?;
    let mut n = 1;
    loop {
        if tracker.observe(n, state.curr())? {
            state.kill();
            break;
        }
        if n == spec.nt() {
            break;
        }
        let row = rows.row(n);
        tracker.accumulate(n, &state.curr, row);
        state.advance(params, spec, row)?;
        n += 1;
    }
    Ok(PathRun { record: tracker.record, history: tracker.history })
}
