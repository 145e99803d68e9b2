//! Oracles shared by the integration tests.
#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use stochwave::Field2;

/// Autocovariance of unit fractional Gaussian noise at lag `k`.
pub fn fgn_autocovariance(hurst: f64, k: usize) -> f64 {
    let k = k as f64;
    let e = 2.0 * hurst;
    0.5 * ((k + 1.0).powf(e) - 2.0 * k.powf(e) + (k - 1.0).abs().powf(e))
}

/// Exact fractional Brownian motion samples on `0, 1, ..., len - 1` by
/// circulant embedding of the increment covariance.
pub fn fbm_path(hurst: f64, len: usize, rng: &mut StdRng) -> Vec<f64> {
    let n = len - 1;
    let size = 2 * n;
    let mut c: Vec<Complex<f64>> = (0..size)
        .map(|k| Complex::new(fgn_autocovariance(hurst, if k <= n { k } else { size - k }), 0.0))
        .collect();
    let fft = FftPlanner::new().plan_fft_forward(size);
    fft.process(&mut c);
    let mut y: Vec<Complex<f64>> = c
        .iter()
        .map(|l| {
            assert!(l.re > -1e-9, "embedding is not positive semi-definite");
            let s = (l.re.max(0.0) / size as f64).sqrt();
            Complex::new(s * rng.sample::<f64, _>(StandardNormal), s * rng.sample::<f64, _>(StandardNormal))
        })
        .collect();
    fft.process(&mut y);
    let mut path = Vec::with_capacity(len);
    let mut acc = 0.0;
    path.push(acc);
    for z in &y[..n] {
        acc += z.re;
        path.push(acc);
    }
    path
}

/// `paths` independent fBm columns of `len` rows each.
pub fn fbm_field(hurst: f64, len: usize, paths: usize, seed: u64) -> Field2 {
    let mut rng = StdRng::seed_from_u64(seed);
    let cols: Vec<Vec<f64>> = (0..paths).map(|_| fbm_path(hurst, len, &mut rng)).collect();
    Field2::from_fn(len, paths, |n, j| cols[j][n])
}

pub fn sample_mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Standard error of the unbiased sample variance.
pub fn variance_stderr(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mean, var) = sample_mean_var(xs);
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / n;
    ((m4 - var * var * (n - 3.0) / (n - 1.0)) / n).sqrt()
}

pub fn random_seeds(seed: u64, count: usize) -> Vec<u64> {
    let mut rng = StdRng::seed_from_u64(seed);
    (0..count).map(|_| rng.random()).collect()
}
