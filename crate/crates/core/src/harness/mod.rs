//! Experiment configuration, batch orchestration, statistics and output.

pub mod config;
pub mod emit;
pub mod refine;
pub mod stats;
pub mod sweep;

pub use config::{ExperimentConfig, Format, Profile};
pub use emit::{emit, format_real, write_atomic};
pub use refine::{refine_study, RefineLevel, RefineTable};
pub use stats::{mean_se, variance_se, wilson_interval, Z95};
pub use sweep::{parallel_map, run_batch, run_sweep, SweepResult, SweepRow};
