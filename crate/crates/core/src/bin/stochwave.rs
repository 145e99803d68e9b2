use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use stochwave::analysis::{
    cone_monotonicity_check, dyadic_counts, holder_estimate, log_spaced_lags, sector_diagnostic, Direction,
};
use stochwave::circle_kernel::{circle_kernel, kernel_space_integral};
use stochwave::girsanov::{log_density_for_shift, reweight_estimate};
use stochwave::harness::config::parse_alpha_list;
use stochwave::harness::emit::{emit, field_csv, to_csv, to_json, write_atomic, Table};
use stochwave::harness::{refine_study, run_sweep, ExperimentConfig, Format};
use stochwave::noise::{DriftShift, NoiseGrid};
use stochwave::solver::{run_path, RunOptions};
use stochwave::{Error, Result};

/// Largest tolerated fraction of numerically invalid paths.
const INVALID_BUDGET: f64 = 1e-3;

#[derive(Parser)]
#[command(name = "stochwave", version, about = "Stochastic wave equation with singular drift on the circle")]
struct Cli {
    /// Experiment file (flat key = value)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; stdout when absent
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// csv or json
    #[arg(long, global = true)]
    format: Option<String>,
    /// Worker threads (default: available parallelism)
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Base seed override
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Comma-separated alpha values for sweeps
    #[arg(long = "alpha-list", global = true)]
    alpha_list: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one path and dump its field history
    Simulate,
    /// Hit probabilities for every alpha of the list
    Sweep {
        /// Also write per-path records here
        #[arg(long)]
        paths: Option<PathBuf>,
    },
    /// Rerun the seeds on refined grids with shared coarse noise
    Refine {
        #[arg(long, default_value_t = 2)]
        levels: u32,
    },
    /// Pooled Hölder exponents of drift-free fields
    Holder {
        #[arg(long, default_value_t = 4.0)]
        moment: f64,
    },
    /// Normalization of a constant Girsanov shift
    GirsanovCheck {
        #[arg(long, default_value_t = 1.0)]
        shift: f64,
    },
    /// Cone, dyadic and sector reports for one path
    Diagnose {
        #[arg(long, default_value_t = 0.02)]
        delta: f64,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long, default_value_t = 1.0)]
        k_sup: f64,
    },
    /// Quadrature check of the circle kernel
    KernelSelftest,
}

enum Failure {
    Error(Error),
    Budget(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Budget(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Error(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::MemoryGuard(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.base_seed = s;
    }
    if let Some(list) = &cli.alpha_list {
        cfg.alpha_list = parse_alpha_list(list)?;
    }
    if let Some(f) = &cli.format {
        cfg.format = f.parse()?;
    }
    if let Some(o) = &cli.out {
        cfg.output = Some(o.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_out(cfg: &ExperimentConfig, bytes: &[u8]) -> Result<()> {
    match &cfg.output {
        Some(p) => write_atomic(p, bytes),
        None => {
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn write_table<T: Table + ?Sized>(cfg: &ExperimentConfig, table: &T) -> Result<()> {
    match &cfg.output {
        Some(p) => emit(table, cfg.format, p),
        None => write_out(cfg, &match cfg.format {
            Format::Csv => to_csv(table)?,
            Format::Json => to_json(table)?,
        }),
    }
}

fn write_json(cfg: &ExperimentConfig, value: &Value) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_out(cfg, &bytes)
}

fn run(cli: Cli) -> std::result::Result<(), Failure> {
    let cfg = load_config(&cli)?;
    let workers = cli.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    match cli.command {
        Command::Simulate => {
            let grid = cfg.grid()?;
            let params = cfg.params(cfg.alpha)?;
            let init = cfg.initial_data(&grid)?;
            let opts = RunOptions { record_history: true, ..cfg.run_options() };
            let run = run_path(&params, &init, &grid, cfg.base_seed, &opts)?;
            let history = run.history.as_ref().expect("history requested");
            write_out(&cfg, &field_csv(history, grid.dt())?)?;
            if cfg.output.is_some() {
                let summary: &[_] = std::slice::from_ref(&run.record);
                std::io::stdout().write_all(&to_json(summary)?).map_err(Error::from)?;
            }
            if run.record.invalid {
                return Err(Failure::Budget("path became non-finite".into()));
            }
        }
        Command::Sweep { paths } => {
            let result = run_sweep(&cfg, workers)?;
            write_table(&cfg, result.rows.as_slice())?;
            if let Some(p) = paths {
                emit(result.paths.as_slice(), cfg.format, &p)?;
            }
            let frac = result.invalid_fraction();
            if frac >= INVALID_BUDGET {
                return Err(Failure::Budget(format!("invalid path fraction {frac} exceeds {INVALID_BUDGET}")));
            }
        }
        Command::Refine { levels } => {
            let table = refine_study(&cfg, cfg.alpha, levels, workers)?;
            write_json(&cfg, &json!({ "alpha": table.alpha, "levels": table.levels, "singular_agreement_25pct": table.singular_agreement(0.25) }))?;
        }
        Command::Holder { moment } => {
            let grid = cfg.grid()?;
            let params = stochwave::solver::ModelParams { drift_enabled: false, ..cfg.params(cfg.alpha)? };
            let init = cfg.initial_data(&grid)?;
            let opts = RunOptions { hit_level: f64::NEG_INFINITY, tau_levels: vec![], record_history: true };
            let fields = stochwave::harness::parallel_map(cfg.n_paths, workers, |i| {
                Ok(run_path(&params, &init, &grid, cfg.seed(i), &opts)?.history.expect("history requested"))
            })?;
            let refs: Vec<&_> = fields.iter().collect();
            let time = holder_estimate(&refs, Direction::Time, &log_spaced_lags(grid.nt() + 1), moment, grid.dt())?;
            let space = holder_estimate(&refs, Direction::Space, &log_spaced_lags(grid.nx()), moment, grid.dx())?;
            write_json(&cfg, &json!({ "n_paths": cfg.n_paths, "time": time, "space": space }))?;
        }
        Command::GirsanovCheck { shift } => {
            let grid = cfg.grid()?;
            let h = DriftShift::constant(&grid, shift);
            let logs = stochwave::harness::parallel_map(cfg.n_paths, workers, |i| {
                Ok(log_density_for_shift(&h, &NoiseGrid::generate(&grid, cfg.seed(i)), grid.nt())?.log_density)
            })?;
            let est = reweight_estimate(&vec![1.0; logs.len()], &logs)?;
            let pass = (est.mean - 1.0).abs() <= 3.0 * est.stderr;
            write_json(&cfg, &json!({ "shift": shift, "n_paths": cfg.n_paths, "estimate": est, "within_3se": pass }))?;
            if !pass {
                return Err(Failure::Budget("mean density departs from 1 by more than 3 SE".into()));
            }
        }
        Command::Diagnose { delta, epsilon, k_sup } => {
            let grid = cfg.grid()?;
            let params = cfg.params(cfg.alpha)?;
            let init = cfg.initial_data(&grid)?;
            let opts = RunOptions { record_history: true, ..cfg.run_options() };
            let run = run_path(&params, &init, &grid, cfg.base_seed, &opts)?;
            let history = run.history.expect("history requested");
            let seed = cfg.base_seed;
            let report = |name: &str, r: Result<Value>| match r {
                Ok(v) => json!({ "seed": seed, "diagnostic": name, "report": v }),
                Err(e) => json!({ "seed": seed, "diagnostic": name, "error": e.to_string() }),
            };
            let apex_row = run.record.hit_step.map_or(run.record.last_step, |k| k.saturating_sub(1));
            let apex_col = history
                .row(apex_row)
                .iter()
                .enumerate()
                .fold((0, f64::INFINITY), |best, (j, &v)| if v < best.1 { (j, v) } else { best })
                .0;
            let out = vec![
                report(
                    "cone",
                    cone_monotonicity_check(&history, &grid, (apex_row, apex_col), 100, &params, seed)
                        .map(|r| serde_json::to_value(r).unwrap_or(Value::Null)),
                ),
                report(
                    "dyadic",
                    dyadic_counts(&history, &grid, k_sup, epsilon, cfg.alpha, 40, run.record.hit_step)
                        .map(|r| serde_json::to_value(r).unwrap_or(Value::Null)),
                ),
                report(
                    "sector",
                    sector_diagnostic(&history, &grid, &params, delta, epsilon, None, 8)
                        .map(|r| serde_json::to_value(r).unwrap_or(Value::Null)),
                ),
            ];
            write_json(&cfg, &Value::Array(out))?;
        }
        Command::KernelSelftest => {
            let mut rows = Vec::new();
            let mut ok = true;
            for &length in &[1.0, 2.0] {
                for &t in &[0.3, 0.7, 1.9] {
                    let points = 10_000;
                    let h = length / points as f64;
                    let mut quad = 0.0;
                    for i in 0..points {
                        quad += circle_kernel(t, -(i as f64 + 0.5) * h, length)? * h;
                    }
                    let exact = kernel_space_integral(t, length)?;
                    let rel = (quad - exact).abs() / exact;
                    ok &= rel < 1e-6;
                    rows.push(json!({ "length": length, "t": t, "quadrature": quad, "exact": exact, "relative_error": rel }));
                }
            }
            write_json(&cfg, &json!({ "pass": ok, "cases": rows }))?;
            if !ok {
                return Err(Failure::Budget("kernel quadrature exceeds tolerance".into()));
            }
        }
    }
    Ok(())
}
