//! Flat `key = value` experiment files.
//!
//! ```text
//! # circle length J (space units)
//! length = 1
//! nx = 256
//! # horizon T (time units), a multiple of dt = J / nx
//! horizon = 1
//! alpha = 0.5
//! alpha_list = 0.5, 4.0
//! diffusion = constant:1          # or tanh:lo:hi
//! trunc_level = 1000000
//! drift = on
//! init = constant:0.2             # or cosine:mean:amplitude:mode, values:v0,v1,...
//! velocity = constant:0
//! n_paths = 400
//! base_seed = 0
//! hit_level = 0
//! stop_m = 1000
//! output = results.csv
//! format = csv
//! ```

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::circle_kernel::InitialData;
use crate::error::{Error, Result};
use crate::girsanov::StopSpec;
use crate::grid::GridSpec;
use crate::solver::{Diffusion, ModelParams, RunOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Config(format!("unknown format '{other}', expected csv or json"))),
        }
    }
}

/// A function on the circle sampled at the grid nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    Constant(f64),
    /// `mean + amplitude cos(2 pi mode x / J)`
    Cosine { mean: f64, amplitude: f64, mode: u32 },
    Values(Vec<f64>),
}

impl Profile {
    pub fn sample(&self, grid: &GridSpec) -> Result<Vec<f64>> {
        let nx = grid.nx();
        match self {
            Profile::Constant(c) => Ok(vec![*c; nx]),
            Profile::Cosine { mean, amplitude, mode } => Ok((0..nx)
                .map(|j| mean + amplitude * (std::f64::consts::TAU * *mode as f64 * grid.node(j) / grid.length()).cos())
                .collect()),
            Profile::Values(v) if v.len() == nx => Ok(v.clone()),
            Profile::Values(v) => Err(Error::Config(format!("tabulated profile has {} values but nx = {nx}", v.len()))),
        }
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s.split_once(':').ok_or_else(|| Error::Config(format!("profile '{s}' needs a kind prefix")))?;
        match kind.trim() {
            "constant" => Ok(Profile::Constant(parse_num(rest)?)),
            "cosine" => {
                let parts: Vec<&str> = rest.split(':').collect();
                if parts.len() != 3 {
                    return Err(Error::Config(format!("cosine profile needs mean:amplitude:mode, got '{rest}'")));
                }
                Ok(Profile::Cosine {
                    mean: parse_num(parts[0])?,
                    amplitude: parse_num(parts[1])?,
                    mode: parts[2].trim().parse().map_err(|_| Error::Config(format!("bad cosine mode '{}'", parts[2])))?,
                })
            }
            "values" => Ok(Profile::Values(rest.split(',').map(parse_num).collect::<Result<_>>()?)),
            other => Err(Error::Config(format!("unknown profile kind '{other}'"))),
        }
    }
}

impl FromStr for Diffusion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let d = match parts.as_slice() {
            ["constant", c] => Diffusion::Constant(parse_num(c)?),
            ["tanh", lo, hi] => Diffusion::Tanh { lo: parse_num(lo)?, hi: parse_num(hi)? },
            _ => return Err(Error::Config(format!("diffusion '{s}' must be constant:c or tanh:lo:hi"))),
        };
        d.validate()?;
        Ok(d)
    }
}

fn parse_num(s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| Error::Config(format!("'{}' is not a number", s.trim())))?;
    if !v.is_finite() {
        return Err(Error::Config(format!("'{}' is not finite", s.trim())));
    }
    Ok(v)
}

fn parse_int<T: FromStr>(key: &str, s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Config(format!("{key}: '{}' is not a non-negative integer", s.trim())))
}

fn parse_bool(key: &str, s: &str) -> Result<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        other => Err(Error::Config(format!("{key}: '{other}' is not on/off"))),
    }
}

pub fn parse_alpha_list(s: &str) -> Result<Vec<f64>> {
    let list: Vec<f64> = s.split(',').filter(|p| !p.trim().is_empty()).map(parse_num).collect::<Result<_>>()?;
    if list.is_empty() {
        return Err(Error::Config("alpha list is empty".into()));
    }
    Ok(list)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub length: f64,
    pub nx: usize,
    pub horizon: f64,
    pub alpha: f64,
    pub alpha_list: Vec<f64>,
    pub diffusion: Diffusion,
    pub trunc_level: u64,
    pub drift: bool,
    pub init: Profile,
    pub velocity: Profile,
    pub n_paths: usize,
    pub base_seed: u64,
    pub hit_level: f64,
    pub stop_m: f64,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            length: 1.0,
            nx: 256,
            horizon: 1.0,
            alpha: 0.5,
            alpha_list: vec![0.5, 4.0],
            diffusion: Diffusion::Constant(1.0),
            trunc_level: 1_000_000,
            drift: true,
            init: Profile::Constant(0.2),
            velocity: Profile::Constant(0.0),
            n_paths: 400,
            base_seed: 0,
            hit_level: 0.0,
            stop_m: 1000.0,
            output: None,
            format: Format::Csv,
        }
    }
}

impl ExperimentConfig {
    /// Parses a config file on top of the defaults; unknown or repeated keys
    /// are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = std::collections::HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!("line {}: duplicate key '{key}'", lineno + 1)));
            }
            match key {
                "length" => cfg.length = parse_num(value)?,
                "nx" => cfg.nx = parse_int(key, value)?,
                "horizon" => cfg.horizon = parse_num(value)?,
                "alpha" => cfg.alpha = parse_num(value)?,
                "alpha_list" => cfg.alpha_list = parse_alpha_list(value)?,
                "diffusion" => cfg.diffusion = value.parse()?,
                "trunc_level" => cfg.trunc_level = parse_int(key, value)?,
                "drift" => cfg.drift = parse_bool(key, value)?,
                "init" => cfg.init = value.parse()?,
                "velocity" => cfg.velocity = value.parse()?,
                "n_paths" => cfg.n_paths = parse_int(key, value)?,
                "base_seed" => cfg.base_seed = parse_int(key, value)?,
                "hit_level" => cfg.hit_level = parse_num(value)?,
                "stop_m" => cfg.stop_m = parse_num(value)?,
                "output" => cfg.output = Some(PathBuf::from(value)),
                "format" => cfg.format = value.parse()?,
                other => return Err(Error::Config(format!("line {}: unknown key '{other}'", lineno + 1))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        if self.n_paths < 1 {
            return Err(Error::Config("n_paths must be at least 1".into()));
        }
        for &a in self.alpha_list.iter().chain(std::iter::once(&self.alpha)) {
            self.params(a)?;
        }
        StopSpec::new(self.stop_m, self.horizon)?;
        let init = self.initial_data(&self.grid()?)?;
        if self.drift {
            init.require_positive()?;
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::with_horizon(self.length, self.nx, self.horizon)
    }

    pub fn params(&self, alpha: f64) -> Result<ModelParams> {
        ModelParams::new(alpha, self.diffusion, self.trunc_level, self.drift)
    }

    pub fn stop(&self) -> Result<StopSpec> {
        StopSpec::new(self.stop_m, self.horizon)
    }

    /// Samples the profiles on `grid`, which may be a refinement of [`Self::grid`].
    pub fn initial_data(&self, grid: &GridSpec) -> Result<InitialData> {
        InitialData::new(self.init.sample(grid)?, self.velocity.sample(grid)?)
    }

    pub fn run_options(&self) -> RunOptions {
        RunOptions { hit_level: self.hit_level, tau_levels: vec![self.trunc_level], record_history: false }
    }

    pub fn seed(&self, i: usize) -> u64 {
        self.base_seed.wrapping_add(i as u64)
    }
}
