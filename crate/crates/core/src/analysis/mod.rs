//! Diagnostics computed from completed path histories.

pub mod cone;
pub mod dyadic;
pub mod holder;
pub mod mean;
pub mod sector;

pub use cone::{cone_monotonicity_check, decompose, drift_integral, ConeReport, DriftDecomposition, DriftIntegral};
pub use dyadic::{dyadic_counts, DyadicCount, DyadicReport};
pub use holder::{holder_estimate, log_spaced_lags, Direction, HolderEstimate};
pub use mean::mean_process;
pub use sector::{sector_diagnostic, SectorReport, SectorRung};
