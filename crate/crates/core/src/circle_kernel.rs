//! Wave kernels on the line and on the circle `R / JZ`, the d'Alembert
//! solution of the free wave equation, and backward light cones on the grid.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::grid::GridSpec;

/// A point of the circle of length `J`, stored as its representative in `[0, J)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct CircleCoord {
    value: f64,
}

impl CircleCoord {
    pub fn new(x: f64, length: f64) -> Self {
        let mut value = x.rem_euclid(length);
        // rem_euclid can round up to `length` for tiny negative inputs
        if value >= length {
            value = 0.0;
        }
        Self { value }
    }

    pub fn value(&self) -> f64 {
        self.value
    }
}

/// Open backward light cone `{(s, y) : |x - y| < t - s}` with apex `(t, x)`,
/// where `y` ranges over the unwrapped line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LightCone {
    pub apex_t: f64,
    pub apex_x: CircleCoord,
}

impl LightCone {
    pub fn new(apex_t: f64, apex_x: CircleCoord) -> Self {
        Self { apex_t, apex_x }
    }

    pub fn at_node(grid: &GridSpec, n: usize, j: usize) -> Self {
        Self {
            apex_t: grid.time(n),
            apex_x: CircleCoord::new(grid.node(j), grid.length()),
        }
    }

    /// Number of unwrapped copies `y + kJ` that fall inside the cone.
    pub fn multiplicity(&self, s: f64, y: f64, length: f64) -> usize {
        let reach = self.apex_t - s;
        if reach <= 0.0 {
            return 0;
        }
        let y = CircleCoord::new(y, length).value();
        let x = self.apex_x.value();
        let span = (reach / length).ceil() as i64 + 1;
        (-span..=span)
            .filter(|&k| (x - (y + k as f64 * length)).abs() < reach)
            .count()
    }

    pub fn contains(&self, s: f64, y: f64, length: f64) -> bool {
        self.multiplicity(s, y, length) > 0
    }

    /// Apex snapped to the nearest grid node as `(time index, space index)`.
    pub fn apex_indices(&self, grid: &GridSpec) -> (usize, usize) {
        let m = (self.apex_t / grid.dt()).round().max(0.0) as usize;
        let k = grid.wrap((self.apex_x.value() / grid.dx()).round() as isize);
        (m, k)
    }
}

/// Assumption-checked initial position and velocity sampled on the grid nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    u0: Vec<f64>,
    u1: Vec<f64>,
    lower: f64,
    upper: f64,
}

impl InitialData {
    /// Records `c0 = min u0` and `C0 = max u0`. Positivity is only required
    /// when the singular drift is switched on; see [`InitialData::require_positive`].
    pub fn new(u0: Vec<f64>, u1: Vec<f64>) -> Result<Self> {
        if u0.len() != u1.len() {
            return Err(Error::Shape { expected: u0.len().to_string(), found: u1.len().to_string() });
        }
        if u0.is_empty() {
            return Err(Error::Config("initial data is empty".into()));
        }
        if u0.iter().chain(&u1).any(|v| !v.is_finite()) {
            return Err(Error::Config("initial data must be finite".into()));
        }
        let lower = u0.iter().copied().fold(f64::INFINITY, f64::min);
        let upper = u0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self { u0, u1, lower, upper })
    }

    pub fn constant(nx: usize, position: f64, velocity: f64) -> Result<Self> {
        Self::new(vec![position; nx], vec![velocity; nx])
    }

    pub fn from_fns(grid: &GridSpec, u0: impl Fn(f64) -> f64, u1: impl Fn(f64) -> f64) -> Result<Self> {
        let xs: Vec<f64> = (0..grid.nx()).map(|j| grid.node(j)).collect();
        Self::new(xs.iter().map(|&x| u0(x)).collect(), xs.iter().map(|&x| u1(x)).collect())
    }

    pub fn u0(&self) -> &[f64] {
        &self.u0
    }

    pub fn u1(&self) -> &[f64] {
        &self.u1
    }

    pub fn nx(&self) -> usize {
        self.u0.len()
    }

    /// `c0`
    pub fn lower_bound(&self) -> f64 {
        self.lower
    }

    /// `C0`
    pub fn upper_bound(&self) -> f64 {
        self.upper
    }

    pub fn velocity_sup(&self) -> f64 {
        self.u1.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Checks `0 < c0 <= u0 <= C0`.
    pub fn require_positive(&self) -> Result<()> {
        if self.lower > 0.0 {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "initial position must be bounded below by a positive constant, min u0 = {}",
                self.lower
            )))
        }
    }

    pub fn check_grid(&self, grid: &GridSpec) -> Result<()> {
        if self.nx() != grid.nx() {
            return Err(Error::Shape { expected: grid.nx().to_string(), found: self.nx().to_string() });
        }
        Ok(())
    }
}

/// `S(t, x) = 1/2 * 1(|x| <= t)`.
pub fn line_kernel(t: f64, x: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return domain(format!("kernel time must be non-negative, got {t}"));
    }
    Ok(if x.abs() <= t { 0.5 } else { 0.0 })
}

/// Periodised kernel `S_I(t, x) = sum_n S(t, x + nJ)`.
pub fn circle_kernel(t: f64, x: f64, length: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return domain(format!("kernel time must be non-negative, got {t}"));
    }
    if !(length > 0.0) {
        return domain(format!("circle length must be positive, got {length}"));
    }
    // centre the window on the copy nearest the origin so that x and -x
    // are evaluated with the same arithmetic
    let centre = -(x / length).round() as i64;
    let span = (t / length).ceil() as i64 + 1;
    let count = (centre - span..=centre + span)
        .filter(|&n| (x + n as f64 * length).abs() <= t)
        .count();
    Ok(0.5 * count as f64)
}

/// `int_0^J S_I(t, x - y) dy`, which equals `t` for every `x`.
pub fn kernel_space_integral(t: f64, length: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return domain(format!("kernel time must be non-negative, got {t}"));
    }
    if !(length > 0.0) {
        return domain(format!("circle length must be positive, got {length}"));
    }
    Ok(t)
}

/// Integral of the periodic piecewise-linear interpolant of `samples`
/// (nodes `j * dx`) over the unwrapped interval `[a, b]`.
fn periodic_trapezoid(samples: &[f64], dx: f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let nx = samples.len() as isize;
    let at = |i: isize| samples[i.rem_euclid(nx) as usize];
    let value_at = |x: f64| {
        let s = x / dx;
        let i = s.floor();
        let w = s - i;
        let i = i as isize;
        (1.0 - w) * at(i) + w * at(i + 1)
    };
    let first = (a / dx).ceil() as isize;
    let last = (b / dx).floor() as isize;
    if first > last {
        return 0.5 * (value_at(a) + value_at(b)) * (b - a);
    }
    let x_first = first as f64 * dx;
    let x_last = last as f64 * dx;
    let mut total = 0.5 * (value_at(a) + at(first)) * (x_first - a);
    total += 0.5 * (at(last) + value_at(b)) * (b - x_last);
    for i in first..last {
        total += 0.5 * (at(i) + at(i + 1)) * dx;
    }
    total
}

fn snap_node(grid: &GridSpec, x: f64) -> usize {
    grid.wrap((x / grid.dx()).round() as isize)
}

/// Free wave solution `w(t, x) = (u0(x+t) + u0(x-t)) / 2 + int S_I(t, x-y) u1(y) dy`.
///
/// `u0` is read at the grid nodes nearest `x +- t`; the velocity term is the
/// trapezoid integral of `u1` over `[x - t, x + t]` on the unwrapped line.
pub fn dalembert(init: &InitialData, grid: &GridSpec, t: f64, x: CircleCoord) -> Result<f64> {
    init.check_grid(grid)?;
    if !(t >= 0.0) {
        return domain(format!("time must be non-negative, got {t}"));
    }
    if t > grid.horizon() * (1.0 + 1e-12) {
        return domain(format!("time {t} beyond horizon {}", grid.horizon()));
    }
    let x = x.value();
    let u0 = init.u0();
    let position = 0.5 * (u0[snap_node(grid, x + t)] + u0[snap_node(grid, x - t)]);
    let velocity = 0.5 * periodic_trapezoid(init.u1(), grid.dx(), x - t, x + t);
    Ok(position + velocity)
}

/// [`dalembert`] at grid node `(n, k)`.
pub fn dalembert_node(init: &InitialData, grid: &GridSpec, n: usize, k: usize) -> Result<f64> {
    dalembert(init, grid, grid.time(n), CircleCoord::new(grid.node(k), grid.length()))
}

/// Grid nodes `(time index, space index)` inside the open backward cone,
/// with the apex snapped to the nearest node. A node reached through several
/// unwrapped copies appears once per copy.
pub fn cone_members(cone: &LightCone, grid: &GridSpec) -> Vec<(usize, usize)> {
    let (m, k) = cone.apex_indices(grid);
    let mut out = Vec::with_capacity(m * m);
    for n in 0..m {
        let reach = (m - n) as isize;
        for d in (1 - reach)..reach {
            out.push((n, grid.wrap(k as isize + d)));
        }
    }
    out
}

/// Noise cells `(row, column)` on which the kernel `S_I(t - s, x - y)`,
/// sampled at the cell centre, is non-zero for the apex node `(m, k)`.
/// Row `n` contributes the unwrapped columns `k - (m - n) ..= k + (m - n) - 1`.
pub fn kernel_cells(grid: &GridSpec, m: usize, k: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(m * (m + 1));
    for n in 0..m {
        let reach = (m - n) as isize;
        for c in (k as isize - reach)..(k as isize + reach) {
            out.push((n, grid.wrap(c)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    /// Direct sum over a generous window of periodic copies.
    fn kernel_oracle(t: f64, x: f64, length: f64) -> f64 {
        (-1000i64..=1000)
            .map(|n| if (x + n as f64 * length).abs() <= t { 0.5 } else { 0.0 })
            .sum()
    }

    #[test]
    fn line_kernel_values() {
        assert_eq!(line_kernel(1.0, 0.0).unwrap(), 0.5);
        assert_eq!(line_kernel(0.5, 1.0).unwrap(), 0.0);
        assert_eq!(line_kernel(0.3, -0.3).unwrap(), 0.5);
        assert!(matches!(line_kernel(-0.1, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn circle_kernel_values() {
        assert_eq!(kernel_oracle(0.4, 1.9, 2.0), 0.5);
        assert_eq!(circle_kernel(0.4, 1.9, 2.0).unwrap(), 0.5);
        assert_eq!(kernel_oracle(1.2, 0.0, 1.0), 1.5);
        assert_eq!(circle_kernel(1.2, 0.0, 1.0).unwrap(), 1.5);
        assert_eq!(circle_kernel(0.0, 0.3, 2.0).unwrap(), 0.0);
        assert!(circle_kernel(-1.0, 0.3, 2.0).is_err());
        assert!(circle_kernel(1.0, 0.3, 0.0).is_err());
    }

    #[test]
    fn space_integral_values() {
        assert_eq!(kernel_space_integral(0.7, 2.0).unwrap(), 0.7);
        assert_eq!(kernel_space_integral(0.0, 5.0).unwrap(), 0.0);
        // midpoint quadrature of the circle kernel at 10^4 points
        let (t, length) = (3.1, 1.0);
        let n = 10_000;
        let h = length / n as f64;
        let quad: f64 = (0..n).map(|i| circle_kernel(t, 0.123 - (i as f64 + 0.5) * h, length).unwrap() * h).sum();
        assert!((quad - t).abs() / t < 1e-3, "quad {quad}");
    }

    proptest! {
        #[test]
        fn circle_kernel_matches_direct_sum(t in 0.0f64..7.0, x in -9.0f64..9.0, length in 0.3f64..3.0) {
            prop_assert_eq!(circle_kernel(t, x, length).unwrap(), kernel_oracle(t, x, length));
        }

        #[test]
        fn circle_kernel_is_even(t in 0.0f64..7.0, x in -9.0f64..9.0, length in 0.3f64..3.0) {
            prop_assert_eq!(circle_kernel(t, x, length).unwrap(), circle_kernel(t, -x, length).unwrap());
        }

        #[test]
        fn circle_kernel_is_periodic(t in 0.0f64..7.0, x in -5.0f64..5.0, length in 0.3f64..3.0) {
            // stay off the jump set so that rounding in x + J cannot flip a comparison
            let r = CircleCoord::new(x, length).value();
            let near_edge = (-20i64..=20).any(|n| ((r + n as f64 * length).abs() - t).abs() < 1e-9);
            prop_assume!(!near_edge);
            prop_assert_eq!(circle_kernel(t, x, length).unwrap(), circle_kernel(t, x + length, length).unwrap());
        }

        #[test]
        fn circle_coord_reduction(x in -50.0f64..50.0, k in -5i32..5) {
            let length = 1.0;
            let a = CircleCoord::new(x, length).value();
            let b = CircleCoord::new(x + k as f64 * length, length).value();
            prop_assert!((0.0..length).contains(&a));
            prop_assert!((a - b).abs() < 1e-9 || (a - b).abs() > length - 1e-9);
        }
    }

    #[test]
    fn dalembert_constants_are_stationary() {
        let grid = GridSpec::new(1.0, 64, 64).unwrap();
        let init = InitialData::constant(64, 0.7, 0.0).unwrap();
        for &(t, x) in &[(0.0, 0.0), (0.3, 0.5), (1.0, 0.9)] {
            assert_abs_diff_eq!(dalembert(&init, &grid, t, CircleCoord::new(x, 1.0)).unwrap(), 0.7, epsilon = 1e-14);
        }
    }

    #[test]
    fn dalembert_constant_velocity_is_linear() {
        let grid = GridSpec::new(2.0, 64, 128).unwrap();
        let init = InitialData::constant(64, 0.0, 1.5).unwrap();
        for &(t, x) in &[(0.3, 0.1), (1.7, 1.3), (3.2, 0.77)] {
            assert_abs_diff_eq!(dalembert(&init, &grid, t, CircleCoord::new(x, 2.0)).unwrap(), 1.5 * t, epsilon = 1e-12);
        }
    }

    #[test]
    fn dalembert_cosine_separates() {
        let length = 2.0;
        let grid = GridSpec::new(length, 128, 256).unwrap();
        let k = 2.0 * std::f64::consts::PI / length;
        let init = InitialData::from_fns(&grid, |x| (k * x).cos(), |_| 0.0).unwrap();
        for n in [0usize, 7, 64, 200] {
            for j in [0usize, 5, 77] {
                let (t, x) = (grid.time(n), grid.node(j));
                let w = dalembert_node(&init, &grid, n, j).unwrap();
                assert_abs_diff_eq!(w, (k * x).cos() * (k * t).cos(), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn dalembert_rejects_beyond_horizon() {
        let grid = GridSpec::new(1.0, 16, 16).unwrap();
        let init = InitialData::constant(16, 1.0, 0.0).unwrap();
        assert!(dalembert(&init, &grid, 1.5, CircleCoord::new(0.0, 1.0)).is_err());
    }

    #[test]
    fn dalembert_finite_speed() {
        // bumps supported outside the closed backward cone of (t, x) do not move w(t, x)
        let length = 4.0;
        let grid = GridSpec::new(length, 256, 128).unwrap();
        let (n, k) = (80usize, 40usize);
        let (t, x) = (grid.time(n), grid.node(k));
        assert!(t < length / 2.0);
        let base = InitialData::from_fns(&grid, |y| 1.0 + 0.2 * (y * 1.3).sin(), |y| 0.1 * y.cos()).unwrap();
        let bump = |y: f64| {
            let far = CircleCoord::new(y - x + length / 2.0, length).value() - length / 2.0;
            if far.abs() > t + 0.1 && far.abs() < t + 0.4 {
                (far.abs() - t - 0.1) * (t + 0.4 - far.abs())
            } else {
                0.0
            }
        };
        let bumped = InitialData::from_fns(&grid, |y| 1.0 + 0.2 * (y * 1.3).sin() + bump(y), |y| 0.1 * y.cos() + 3.0 * bump(y)).unwrap();
        assert_ne!(base, bumped);
        let a = dalembert_node(&base, &grid, n, k).unwrap();
        let b = dalembert_node(&bumped, &grid, n, k).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cone_at_time_zero_is_empty() {
        let grid = GridSpec::new(1.0, 32, 32).unwrap();
        assert!(cone_members(&LightCone::at_node(&grid, 0, 3), &grid).is_empty());
    }

    fn brute_force_members(grid: &GridSpec, m: usize, k: usize) -> Vec<(usize, usize)> {
        // exact dyadic arithmetic: J = 1 and nx a power of two
        let (t, x) = (grid.time(m), grid.node(k));
        let mut out = Vec::new();
        for n in 0..m {
            let s = grid.time(n);
            for jj in -(4 * grid.nx() as isize)..(5 * grid.nx() as isize) {
                let y = jj as f64 * grid.dx();
                if (x - y).abs() < t - s {
                    out.push((n, grid.wrap(jj)));
                }
            }
        }
        out.sort_unstable();
        out
    }

    #[test]
    fn cone_members_small_triangle() {
        let grid = GridSpec::new(1.0, 32, 32).unwrap();
        let mut got = cone_members(&LightCone::at_node(&grid, 2, 10), &grid);
        got.sort_unstable();
        assert_eq!(got, vec![(0, 9), (0, 10), (0, 11), (1, 10)]);
        assert_eq!(got, brute_force_members(&grid, 2, 10));
    }

    #[test]
    fn cone_members_match_scan_with_wrapping() {
        let grid = GridSpec::new(1.0, 16, 64).unwrap();
        for &(m, k) in &[(5, 0), (9, 15), (20, 3), (40, 8)] {
            let mut got = cone_members(&LightCone::at_node(&grid, m, k), &grid);
            got.sort_unstable();
            assert_eq!(got, brute_force_members(&grid, m, k), "apex ({m},{k})");
            assert_eq!(got.len(), m * m);
        }
    }

    #[test]
    fn interior_cone_is_strict_subset() {
        let grid = GridSpec::new(1.0, 64, 64).unwrap();
        let apex = LightCone::at_node(&grid, 20, 30);
        let outer: std::collections::HashSet<_> = cone_members(&apex, &grid).into_iter().collect();
        for &(s, y) in &[(19usize, 30usize), (10, 25), (5, 40), (1, 30)] {
            let inner: std::collections::HashSet<_> = cone_members(&LightCone::at_node(&grid, s, y), &grid).into_iter().collect();
            assert!(inner.is_subset(&outer));
            assert!(inner.len() < outer.len());
            assert!(outer.contains(&(s, y)) && !inner.contains(&(s, y)));
        }
    }

    #[test]
    fn light_cone_membership() {
        let cone = LightCone::new(1.0, CircleCoord::new(0.5, 1.0));
        assert!(!cone.contains(1.0, 0.5, 1.0));
        assert!(!cone.contains(1.5, 0.5, 1.0));
        assert!(cone.contains(0.9, 0.55, 1.0));
        // reach 0.9 > J/2 wraps once on each side
        assert_eq!(cone.multiplicity(0.1, 0.0, 1.0), 2);
    }

    #[test]
    fn kernel_cells_agree_with_cell_centre_kernel() {
        let grid = GridSpec::new(1.0, 16, 48).unwrap();
        for &(m, k) in &[(1usize, 0usize), (6, 3), (30, 9)] {
            let mut got = kernel_cells(&grid, m, k);
            got.sort_unstable();
            let mut want = Vec::new();
            for n in 0..m {
                for jj in -(4 * 16isize)..(5 * 16) {
                    let s = (n as f64 + 0.5) * grid.dt();
                    let y = (jj as f64 + 0.5) * grid.dx();
                    if line_kernel(grid.time(m) - s, grid.node(k) - y).unwrap() > 0.0 {
                        want.push((n, grid.wrap(jj)));
                    }
                }
            }
            want.sort_unstable();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn initial_data_bounds() {
        let d = InitialData::new(vec![0.5, 1.0, 2.0], vec![0.0; 3]).unwrap();
        assert_eq!(d.lower_bound(), 0.5);
        assert_eq!(d.upper_bound(), 2.0);
        d.require_positive().unwrap();
        let z = InitialData::new(vec![0.0, 1.0], vec![0.0; 2]).unwrap();
        assert!(z.require_positive().is_err());
        assert!(InitialData::new(vec![1.0, f64::NAN], vec![0.0; 2]).is_err());
        assert!(InitialData::new(vec![1.0], vec![0.0; 2]).is_err());
    }
}
