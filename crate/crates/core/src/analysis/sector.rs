//! Sector bound near the first approach to a small level `delta`.
//!
//! Around the point `(tau_d, x_d)` where the field first dips to `delta`, a
//! Hölder bound `u <= Y R^{1/2 - eps}` combined with the drift pushing up
//! from inside the cone gives
//!
//! ```text
//! u(t, x) < Y R^{1/2 - eps} (1 - a R^e),   a = pi Y^{-1-alpha} / 2^{alpha+2},
//!                                          e = (3 - alpha)/2 + eps (alpha + 1)
//! ```
//!
//! on the boundary of the sector of radius `R`. For `alpha > 3` and small
//! `eps` the exponent `e` is negative, so the bound turns negative below
//! `R_crit = a^{-1/e}`, which is impossible for a positive field.

use serde::{Deserialize, Serialize};

use crate::analysis::cone::drift_integral;
use crate::analysis::holder::{holder_estimate, log_spaced_lags, Direction};
use crate::error::{Error, Result};
use crate::grid::{Field2, GridSpec};
use crate::solver::ModelParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorRung {
    pub radius: f64,
    /// Row of the boundary point `(tau_d - R, x_d)`.
    pub row: usize,
    pub bound: f64,
    pub forces_negative: bool,
    pub delta_d: f64,
    pub delta_vn: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorReport {
    pub tau_delta: f64,
    pub tau_row: usize,
    pub x_delta: usize,
    /// Empirical Hölder constant standing in for the random constant `Y`.
    pub y_constant: f64,
    pub y_from_estimate: bool,
    pub exponent: f64,
    pub a: f64,
    pub r_crit: f64,
    pub rungs: Vec<SectorRung>,
}

/// `Y R^{1/2 - eps} (1 - a R^e)`
pub fn sector_bound(y: f64, alpha: f64, epsilon: f64, radius: f64) -> f64 {
    let e = (3.0 - alpha) / 2.0 + epsilon * (alpha + 1.0);
    let a = std::f64::consts::PI * y.powf(-1.0 - alpha) / 2f64.powf(alpha + 2.0);
    y * radius.powf(0.5 - epsilon) * (1.0 - a * radius.powf(e))
}

/// Locates `(tau_d, x_d)`, evaluates the bound on a ladder of radii below
/// `tau_d / 2`, and reports the empirical change of `D` and of `V + N`
/// between each boundary point and the apex.
///
/// `y_override` replaces the Hölder-fit constant; `ladder` is the number of
/// rungs, halving the radius each time.
pub fn sector_diagnostic(
    history: &Field2,
    grid: &GridSpec,
    params: &ModelParams,
    delta: f64,
    epsilon: f64,
    y_override: Option<f64>,
    ladder: usize,
) -> Result<SectorReport> {
    let alpha = params.alpha;
    if alpha <= 3.0 {
        return Err(Error::Precondition(format!(
            "the sector bound needs alpha > 3 so that its exponent can be negative, got alpha = {alpha}"
        )));
    }
    let e = (3.0 - alpha) / 2.0 + epsilon * (alpha + 1.0);
    if !(epsilon > 0.0) || !(e < 0.0) {
        return Err(Error::Precondition(format!(
            "need eps > 0 and (3 - alpha)/2 + eps (alpha + 1) < 0, got eps = {epsilon}, exponent = {e}"
        )));
    }
    let tau_row = (0..history.rows())
        .find(|&n| history.row(n).iter().any(|&v| v <= delta))
        .ok_or(Error::NoCrossing(delta))?;
    let row = history.row(tau_row);
    let min = row.iter().copied().fold(f64::INFINITY, f64::min);
    let x_delta = row.iter().position(|&v| v == min).unwrap_or(0);

    let (y, from_estimate) = match y_override {
        Some(y) => (y, false),
        None => {
            let est = holder_estimate(&[history], Direction::Space, &log_spaced_lags(history.cols()), 4.0, grid.dx())?;
            (est.constant, true)
        }
    };
    if !(y > 0.0 && y.is_finite()) {
        return Err(Error::Domain(format!("Hölder constant must be positive, got {y}")));
    }
    let a = std::f64::consts::PI * y.powf(-1.0 - alpha) / 2f64.powf(alpha + 2.0);
    let r_crit = a.powf(-1.0 / e);

    let tau_delta = grid.time(tau_row);
    let apex_d = 0.5 * drift_integral(history, grid, tau_row, x_delta, params)?.value;
    let apex_u = history.get(tau_row, x_delta);
    let mut rungs = Vec::with_capacity(ladder);
    let mut radius = 0.5 * tau_delta * 0.99;
    for _ in 0..ladder {
        if radius < grid.dt() {
            break;
        }
        let back = (radius / grid.dt()).round() as usize;
        let r_row = tau_row - back.min(tau_row);
        let d = 0.5 * drift_integral(history, grid, r_row, x_delta, params)?.value;
        let delta_d = apex_d - d;
        let delta_vn = (apex_u - history.get(r_row, x_delta)) - delta_d;
        let bound = sector_bound(y, alpha, epsilon, radius);
        rungs.push(SectorRung { radius, row: r_row, bound, forces_negative: bound < 0.0, delta_d, delta_vn });
        radius *= 0.5;
    }
    Ok(SectorReport { tau_delta, tau_row, x_delta, y_constant: y, y_from_estimate: from_estimate, exponent: e, a, r_crit, rungs })
}
