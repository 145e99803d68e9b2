//! Discrete space-time white noise.
//!
//! Every increment is a pure function of `(seed, level, n, j)` through a
//! Philox4x32-10 counter-based generator, so any cell can be regenerated
//! without storing the grid and paths can run in any order.

use crate::error::{Error, Result};
use crate::grid::{Field2, GridSpec};

const PHILOX_M0: u32 = 0xD251_1F53;
const PHILOX_M1: u32 = 0xCD9E_8D57;
const PHILOX_W0: u32 = 0x9E37_79B9;
const PHILOX_W1: u32 = 0xBB67_AE85;

/// Stream tag for the primary noise field.
pub const NOISE_STREAM: u32 = 0;

#[inline]
fn mulhilo(a: u32, b: u32) -> (u32, u32) {
    let p = a as u64 * b as u64;
    ((p >> 32) as u32, p as u32)
}

/// Philox4x32 with 10 rounds.
pub fn philox4x32(counter: [u32; 4], key: [u32; 2]) -> [u32; 4] {
    let mut c = counter;
    let mut k = key;
    for round in 0..10 {
        if round > 0 {
            k[0] = k[0].wrapping_add(PHILOX_W0);
            k[1] = k[1].wrapping_add(PHILOX_W1);
        }
        let (hi0, lo0) = mulhilo(PHILOX_M0, c[0]);
        let (hi1, lo1) = mulhilo(PHILOX_M1, c[2]);
        c = [hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0];
    }
    c
}

/// Keyed generator: one Philox block per counter value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterRng {
    key: [u32; 2],
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        Self { key: [seed as u32, (seed >> 32) as u32] }
    }

    pub fn block(&self, counter: [u32; 4]) -> [u32; 4] {
        philox4x32(counter, self.key)
    }

    /// Standard normal draw for the given counter (Box-Muller, cosine branch).
    pub fn normal(&self, counter: [u32; 4]) -> f64 {
        let b = self.block(counter);
        let to_unit = |hi: u32, lo: u32| ((((hi as u64) << 32) | lo as u64) >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        // 1 - u lies in (0, 1], keeping the logarithm finite
        let u1 = 1.0 - to_unit(b[0], b[1]);
        let u2 = to_unit(b[2], b[3]);
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

/// `N(0, 1)` draw addressed by `(seed, stream, level, n, j)`.
pub fn standard_normal(seed: u64, stream: u32, level: u32, n: usize, j: usize) -> f64 {
    CounterRng::new(seed).normal([j as u32, n as u32, level, stream])
}

/// Per-cell increments `W(n, j)` over `[n dt, (n+1) dt] x [j dx, (j+1) dx]`
/// with variance `dt dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseGrid {
    spec: GridSpec,
    seed: u64,
    data: Field2,
}

impl NoiseGrid {
    pub fn generate(spec: &GridSpec, seed: u64) -> Self {
        let rng = CounterRng::new(seed);
        let sigma = spec.cell_area().sqrt();
        let data = Field2::from_fn(spec.nt(), spec.nx(), |n, j| {
            sigma * rng.normal([j as u32, n as u32, 0, NOISE_STREAM])
        });
        Self { spec: *spec, seed, data }
    }

    pub fn zeros(spec: &GridSpec) -> Self {
        Self { spec: *spec, seed: 0, data: Field2::zeros(spec.nt(), spec.nx()) }
    }

    pub fn from_field(spec: &GridSpec, seed: u64, data: Field2) -> Result<Self> {
        if data.rows() != spec.nt() || data.cols() != spec.nx() {
            return Err(Error::Shape {
                expected: format!("{}x{}", spec.nt(), spec.nx()),
                found: format!("{}x{}", data.rows(), data.cols()),
            });
        }
        Ok(Self { spec: *spec, seed, data })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn increment(&self, n: usize, j: usize) -> f64 {
        self.data.get(n, j)
    }

    pub fn row(&self, n: usize) -> &[f64] {
        self.data.row(n)
    }

    pub fn field(&self) -> &Field2 {
        &self.data
    }

    pub fn field_mut(&mut self) -> &mut Field2 {
        &mut self.data
    }

    /// `W'(n, j) = W(n, j) + h(n, j) dt dx`.
    pub fn shift(&self, shift: &DriftShift) -> Result<Self> {
        if !self.data.same_shape(&shift.values) {
            return Err(Error::Shape {
                expected: format!("{}x{}", self.data.rows(), self.data.cols()),
                found: format!("{}x{}", shift.values.rows(), shift.values.cols()),
            });
        }
        let area = self.spec.cell_area();
        let data = self
            .data
            .as_slice()
            .iter()
            .zip(shift.values.as_slice())
            .map(|(w, h)| w + h * area)
            .collect();
        Ok(Self { spec: self.spec, seed: self.seed, data: Field2::from_vec(self.data.rows(), self.data.cols(), data)? })
    }

    /// Noise on `spec.refined(levels)` whose `2^levels x 2^levels` block sums
    /// reproduce `generate(spec, seed)` up to rounding.
    ///
    /// Each refinement splits a cell into four children
    /// `W/4 + s (Z_i - mean Z)` with `s^2` the child cell area; the children
    /// are independent with the right variance and sum to the parent.
    pub fn generate_refined(spec: &GridSpec, seed: u64, levels: u32) -> Result<Self> {
        let mut current = Self::generate(spec, seed);
        let rng = CounterRng::new(seed);
        for level in 1..=levels {
            let fine = spec.refined(level)?;
            let sigma = fine.cell_area().sqrt();
            let mut data = Field2::zeros(fine.nt(), fine.nx());
            for n in 0..current.spec.nt() {
                for j in 0..current.spec.nx() {
                    let parent = current.increment(n, j);
                    let cells = [(2 * n, 2 * j), (2 * n, 2 * j + 1), (2 * n + 1, 2 * j), (2 * n + 1, 2 * j + 1)];
                    let z = cells.map(|(a, b)| rng.normal([b as u32, a as u32, level, NOISE_STREAM]));
                    let mean = 0.25 * z.iter().sum::<f64>();
                    for (&(a, b), zi) in cells.iter().zip(z) {
                        data.set(a, b, 0.25 * parent + sigma * (zi - mean));
                    }
                }
            }
            current = Self { spec: fine, seed, data };
        }
        Ok(current)
    }

    /// Sums `2^levels x 2^levels` blocks onto the coarser grid.
    pub fn coarsen(&self, levels: u32) -> Result<Self> {
        let factor = 1usize << levels;
        if !self.spec.nx().is_multiple_of(factor) || !self.spec.nt().is_multiple_of(factor) {
            return Err(Error::Shape {
                expected: format!("dimensions divisible by {factor}"),
                found: format!("{}x{}", self.spec.nt(), self.spec.nx()),
            });
        }
        let coarse = GridSpec::new(self.spec.length(), self.spec.nx() / factor, self.spec.nt() / factor)?;
        let mut data = Field2::zeros(coarse.nt(), coarse.nx());
        for n in 0..self.spec.nt() {
            for (j, w) in self.row(n).iter().enumerate() {
                let (a, b) = (n / factor, j / factor);
                data.set(a, b, data.get(a, b) + w);
            }
        }
        Ok(Self { spec: coarse, seed: self.seed, data })
    }
}

/// Predictable shift `h(n, j)` in noise-density units.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftShift {
    values: Field2,
}

impl DriftShift {
    pub fn constant(spec: &GridSpec, h: f64) -> Self {
        Self { values: Field2::from_fn(spec.nt(), spec.nx(), |_, _| h) }
    }

    pub fn zeros(spec: &GridSpec) -> Self {
        Self::constant(spec, 0.0)
    }

    pub fn from_field(values: Field2) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &Field2 {
        &self.values
    }

    pub fn negated(&self) -> Self {
        let v = &self.values;
        Self { values: Field2::from_fn(v.rows(), v.cols(), |n, j| -v.get(n, j)) }
    }
}

/// Per-cell integrand of the stochastic convolution.
#[derive(Debug, Clone, Copy)]
pub enum Weight<'a> {
    Constant(f64),
    Cells(&'a Field2),
}

impl Weight<'_> {
    #[inline]
    fn at(&self, n: usize, j: usize) -> f64 {
        match self {
            Weight::Constant(c) => *c,
            Weight::Cells(f) => f.get(n, j),
        }
    }
}

/// `N_rho(t_m, x_k) = sum S_I(t_m - s, x_k - y) rho(s, y) W(s, y)` over cells,
/// with the kernel read at cell centres.
///
/// At the centre of row `n` the kernel is `1/2` on the unwrapped cells
/// `k - (m - n) ..= k + (m - n) - 1` and zero elsewhere, so the sum runs over
/// those cells directly, counting wrapped copies with multiplicity.
pub fn stochastic_convolution(noise: &NoiseGrid, weight: Weight<'_>, m: usize, k: usize) -> Result<f64> {
    let spec = noise.spec();
    if m > spec.nt() {
        return Err(Error::HistoryTooShort { available: spec.nt(), required: m });
    }
    if let Weight::Cells(f) = weight {
        if f.rows() < m || f.cols() != spec.nx() {
            return Err(Error::Shape {
                expected: format!("at least {m}x{}", spec.nx()),
                found: format!("{}x{}", f.rows(), f.cols()),
            });
        }
    }
    let mut total = 0.0;
    for n in 0..m {
        let tau = (m - n) as isize;
        let row = noise.row(n);
        for c in (k as isize - tau)..(k as isize + tau) {
            let j = spec.wrap(c);
            total += weight.at(n, j) * row[j];
        }
    }
    Ok(0.5 * total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle_kernel::circle_kernel;

    fn grid(nx: usize, nt: usize) -> GridSpec {
        GridSpec::new(1.0, nx, nt).unwrap()
    }

    #[test]
    fn philox_known_answers() {
        assert_eq!(philox4x32([0; 4], [0; 2]), [0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8]);
        assert_eq!(philox4x32([u32::MAX; 4], [u32::MAX; 2]), [0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd]);
        assert_eq!(
            philox4x32([0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344], [0xa4093822, 0x299f31d0]),
            [0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1]
        );
    }

    #[test]
    fn generation_is_deterministic() {
        let g = grid(64, 40);
        assert_eq!(NoiseGrid::generate(&g, 17), NoiseGrid::generate(&g, 17));
        assert_eq!(
            NoiseGrid::generate(&g, 17).increment(5, 9),
            g.cell_area().sqrt() * standard_normal(17, NOISE_STREAM, 0, 5, 9)
        );
    }

    #[test]
    fn normalized_moments() {
        let g = grid(128, 128);
        let noise = NoiseGrid::generate(&g, 3);
        let s = g.cell_area().sqrt();
        let z: Vec<f64> = noise.field().as_slice().iter().map(|w| w / s).collect();
        let n = z.len() as f64;
        let mean = z.iter().sum::<f64>() / n;
        let var = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 4.0 / n.sqrt(), "mean {mean}");
        assert!((var - 1.0).abs() < 0.1, "var {var}");
    }

    #[test]
    fn neighbouring_seeds_are_uncorrelated() {
        let g = grid(128, 100);
        let a = NoiseGrid::generate(&g, 1000);
        let b = NoiseGrid::generate(&g, 1001);
        let (x, y) = (a.field().as_slice(), b.field().as_slice());
        let n = x.len() as f64;
        let mx = x.iter().sum::<f64>() / n;
        let my = y.iter().sum::<f64>() / n;
        let cov: f64 = x.iter().zip(y).map(|(p, q)| (p - mx) * (q - my)).sum();
        let vx: f64 = x.iter().map(|p| (p - mx).powi(2)).sum();
        let vy: f64 = y.iter().map(|q| (q - my).powi(2)).sum();
        let corr = cov / (vx * vy).sqrt();
        assert!(corr.abs() < 4.0 / n.sqrt(), "corr {corr}");
    }

    #[test]
    fn single_cell_variance_across_seeds() {
        let g = grid(32, 16);
        let draws: Vec<f64> = (0..10_000u64).map(|s| NoiseGrid::generate(&g, s).increment(7, 11)).collect();
        let n = draws.len() as f64;
        let mean = draws.iter().sum::<f64>() / n;
        let var = draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let target = g.cell_area();
        assert!((var / target - 1.0).abs() < 0.05, "var {var} vs {target}");
    }

    #[test]
    fn shift_identities() {
        let g = grid(16, 12);
        let noise = NoiseGrid::generate(&g, 9);
        assert_eq!(noise.shift(&DriftShift::zeros(&g)).unwrap(), noise);

        let k = 1.5;
        let shifted = noise.shift(&DriftShift::constant(&g, k)).unwrap();
        for n in 0..g.nt() {
            for j in 0..g.nx() {
                assert_eq!(shifted.increment(n, j), noise.increment(n, j) + k * g.cell_area());
            }
        }

        // integer-valued h keeps every product exact, so the inverse is bitwise
        let h = DriftShift::from_field(Field2::from_fn(g.nt(), g.nx(), |n, j| ((n * 7 + j * 3) % 11) as f64 - 5.0));
        let back = noise.shift(&h).unwrap().shift(&h.negated()).unwrap();
        for (a, b) in back.field().as_slice().iter().zip(noise.field().as_slice()) {
            assert!((a - b).abs() < 1e-15);
        }

        let wrong = DriftShift::constant(&grid(16, 13), 1.0);
        assert!(matches!(noise.shift(&wrong), Err(Error::Shape { .. })));
    }

    #[test]
    fn shift_inverse_is_bit_exact_for_dyadic_cells() {
        // dt dx = 2^-8, so h dt dx is exact and the round trip loses nothing
        let g = grid(16, 12);
        let noise = NoiseGrid::from_field(&g, 0, Field2::from_fn(12, 16, |n, j| (n as f64 - j as f64) / 64.0)).unwrap();
        let h = DriftShift::from_field(Field2::from_fn(12, 16, |n, j| ((n * 5 + j) % 9) as f64 - 4.0));
        assert_eq!(noise.shift(&h).unwrap().shift(&h.negated()).unwrap(), noise);
    }

    #[test]
    fn refined_noise_sums_to_parent() {
        let g = grid(16, 8);
        let coarse = NoiseGrid::generate(&g, 5);
        for levels in 1..=2 {
            let fine = NoiseGrid::generate_refined(&g, 5, levels).unwrap();
            assert_eq!(fine.spec(), &g.refined(levels).unwrap());
            let back = fine.coarsen(levels).unwrap();
            for (a, b) in back.field().as_slice().iter().zip(coarse.field().as_slice()) {
                assert!((a - b).abs() < 1e-14, "{a} vs {b}");
            }
        }
        assert_eq!(NoiseGrid::generate_refined(&g, 5, 0).unwrap(), coarse);
    }

    #[test]
    fn refined_cells_have_fine_variance() {
        let g = grid(8, 4);
        let fine_area = g.refined(1).unwrap().cell_area();
        let (mut sum_sq, mut sum_cross) = (0.0, 0.0);
        let reps = 10_000;
        for s in 0..reps {
            let f = NoiseGrid::generate_refined(&g, s, 1).unwrap();
            sum_sq += f.increment(3, 5).powi(2);
            sum_cross += f.increment(2, 4) * f.increment(3, 5);
        }
        let var = sum_sq / reps as f64;
        let cov = sum_cross / reps as f64;
        assert!((var / fine_area - 1.0).abs() < 0.05, "var {var} vs {fine_area}");
        assert!(cov.abs() < 4.0 * fine_area / (reps as f64).sqrt(), "cov {cov}");
    }

    #[test]
    fn coarsened_variance_is_additive() {
        let g = grid(8, 4);
        let fine = g.refined(2).unwrap();
        let reps = 10_000u64;
        let sums: Vec<f64> = (0..reps)
            .map(|s| NoiseGrid::generate(&fine, s).coarsen(2).unwrap().increment(1, 2))
            .collect();
        let var = sums.iter().map(|v| v * v).sum::<f64>() / reps as f64;
        assert!((var / g.cell_area() - 1.0).abs() < 0.05, "var {var}");
    }

    #[test]
    fn convolution_of_zero_weight_vanishes() {
        let g = grid(16, 10);
        let noise = NoiseGrid::generate(&g, 1);
        assert_eq!(stochastic_convolution(&noise, Weight::Constant(0.0), 8, 3).unwrap(), 0.0);
        assert!(stochastic_convolution(&noise, Weight::Constant(1.0), 11, 3).is_err());
    }

    #[test]
    fn convolution_matches_kernel_sum() {
        // dyadic J and nx keep cell centres exact, so the kernel test is sharp
        let g = grid(16, 40);
        let noise = NoiseGrid::generate(&g, 77);
        let rho = Field2::from_fn(g.nt(), g.nx(), |n, j| 1.0 + 0.1 * ((n + 2 * j) % 5) as f64);
        for &(m, k) in &[(0usize, 0usize), (1, 0), (3, 5), (8, 15), (17, 2), (40, 9)] {
            let mut oracle = 0.0;
            for n in 0..m {
                for j in 0..g.nx() {
                    let s = (n as f64 + 0.5) * g.dt();
                    let y = (j as f64 + 0.5) * g.dx();
                    let kern = circle_kernel(g.time(m) - s, g.node(k) - y, g.length()).unwrap();
                    oracle += kern * rho.get(n, j) * noise.increment(n, j);
                }
            }
            let got = stochastic_convolution(&noise, Weight::Cells(&rho), m, k).unwrap();
            assert!((got - oracle).abs() < 1e-12, "({m},{k}): {got} vs {oracle}");
        }
    }

    #[test]
    fn disjoint_rectangles_are_uncorrelated() {
        let g = grid(16, 8);
        let reps = 4000u64;
        let pairs: Vec<(f64, f64)> = (0..reps)
            .map(|s| {
                let w = NoiseGrid::generate(&g, s);
                let a: f64 = (0..4).flat_map(|n| (0..5).map(move |j| (n, j))).map(|(n, j)| w.increment(n, j)).sum();
                let b: f64 = (2..8).flat_map(|n| (6..12).map(move |j| (n, j))).map(|(n, j)| w.increment(n, j)).sum();
                (a, b)
            })
            .collect();
        let n = reps as f64;
        let cov = pairs.iter().map(|(a, b)| a * b).sum::<f64>() / n;
        let sd_a = (20.0 * g.cell_area()).sqrt();
        let sd_b = (36.0 * g.cell_area()).sqrt();
        assert!(cov.abs() < 4.0 * sd_a * sd_b / n.sqrt(), "cov {cov}");
    }
}
