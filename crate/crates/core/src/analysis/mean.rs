use crate::grid::{Field2, GridSpec};

/// `V(t_n) = sum_j u(t_n, x_j) dx` for every recorded row.
pub fn mean_process(history: &Field2, grid: &GridSpec) -> Vec<f64> {
    let dx = grid.dx();
    (0..history.rows()).map(|n| history.row(n).iter().sum::<f64>() * dx).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle_kernel::InitialData;
    use crate::noise::NoiseGrid;
    use crate::solver::{run_with_noise, Diffusion, ModelParams, RunOptions};

    #[test]
    fn deterministic_mean_is_linear() {
        let spec = GridSpec::new(2.0, 64, 200).unwrap();
        let init = InitialData::from_fns(&spec, |x| 1.0 + 0.5 * (std::f64::consts::PI * x).cos(), |x| 0.3 + (std::f64::consts::PI * x).sin()).unwrap();
        let p = ModelParams::new(1.0, Diffusion::Constant(1.0), 10, false).unwrap();
        let opts = RunOptions { hit_level: f64::NEG_INFINITY, tau_levels: vec![], record_history: true };
        let h = run_with_noise(&p, &init, &NoiseGrid::zeros(&spec), &opts).unwrap().history.unwrap();
        let v = mean_process(&h, &spec);
        let int_u0: f64 = init.u0().iter().sum::<f64>() * spec.dx();
        let int_u1: f64 = init.u1().iter().sum::<f64>() * spec.dx();
        for (n, vn) in v.iter().enumerate() {
            assert!((vn - (int_u0 + spec.time(n) * int_u1)).abs() < 1e-10, "n={n}");
        }
    }
}
