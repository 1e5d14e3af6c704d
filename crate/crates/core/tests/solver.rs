mod common;

use num_complex::Complex;
use rnls_core::norms::component_masses;
use rnls_core::solver::{
    evolve, galilean_boost, linear_step, rescale, BlowupReason, EvolutionStatus,
};
use rnls_core::variational::energy;
use rnls_core::{finite_labels, Field, Field32, Grid, Grid32, SolverConfig};

fn run(u0: &Field, cfg: &SolverConfig) -> Field {
    let out = evolve(u0, cfg, &mut []).unwrap();
    assert_eq!(out.status, EvolutionStatus::Completed);
    out.final_state
}

fn fixed(dt: f64, t_end: f64) -> SolverConfig {
    SolverConfig { sample_interval: t_end, ..SolverConfig::fixed_step(dt, t_end) }
}

/// `e^{itΔ} e^{-|x|^2/2} = (1+2it)^{-1} e^{-|x|^2/(2(1+2it))}`.
fn free_gaussian(grid: &Grid, t: f64, amplitude: f64) -> Field {
    let a = Complex::new(1.0, 2.0 * t);
    Field::from_fn(grid, vec![0], |_, x, y| (-(x * x + y * y) / (2.0 * a)).exp() / a * amplitude).unwrap()
}

#[test]
fn linear_flow_matches_the_free_gaussian() {
    let grid = Grid::new(40.0, 256).unwrap();
    let u0 = free_gaussian(&grid, 0.0, 1.0);
    for t in [0.25, 0.5, 1.0] {
        let err = linear_step(&u0, t).max_abs_diff(&free_gaussian(&grid, t, 1.0));
        assert!(err < 1e-8, "t={t}: {err:e}");
    }
}

#[test]
fn weak_data_follows_the_free_flow() {
    // cubic effects are O(amplitude^2) relative, far below the tolerance
    let amp = 1e-5;
    let grid = Grid::new(40.0, 256).unwrap();
    let u0 = free_gaussian(&grid, 0.0, amp);
    let out = run(&u0, &SolverConfig { t_end: 1.0, dt_max: 0.05, ..Default::default() });
    let err = out.max_abs_diff(&free_gaussian(&grid, 1.0, amp)) / amp;
    assert!(err < 1e-8, "{err:e}");
}

#[test]
fn strang_splitting_is_second_order() {
    let grid = Grid::new(24.0, 128).unwrap();
    let u0 = common::moving_pair(&grid).scaled_real(1.5);
    let reference = run(&u0, &fixed(0.00125, 1.0));
    let errors: Vec<f64> = [0.04, 0.02, 0.01]
        .iter()
        .map(|&dt| run(&u0, &fixed(dt, 1.0)).max_abs_diff(&reference))
        .collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((3.6..4.4).contains(&ratio), "errors {errors:?}");
    }
}

#[test]
fn component_masses_are_conserved_and_energy_error_is_second_order() {
    let grid = Grid::new(24.0, 128).unwrap();
    let u0 = common::moving_pair(&grid);
    let m0 = component_masses(&u0);
    let e0 = energy(&u0);
    let t_end = 1.0;
    let mut energy_errors = Vec::new();
    for dt in [0.01, 0.005] {
        let mut worst_mass: f64 = 0.0;
        let mut worst_energy: f64 = 0.0;
        let mut monitor = |_t: f64, u: &Field| {
            for (m, m0) in component_masses(u).iter().zip(&m0) {
                worst_mass = worst_mass.max((m - m0).abs() / m0);
            }
            worst_energy = worst_energy.max((energy(u) - e0).abs() / e0.abs());
        };
        let cfg = SolverConfig { sample_interval: 0.05, ..SolverConfig::fixed_step(dt, t_end) };
        evolve(&u0, &cfg, &mut [&mut monitor]).unwrap();
        assert!(worst_mass / t_end < 1e-10, "mass drift {worst_mass:e}");
        energy_errors.push(worst_energy);
    }
    let ratio = energy_errors[0] / energy_errors[1];
    assert!((3.5..4.5).contains(&ratio), "{energy_errors:?}");
}

#[test]
fn galilean_covariance() {
    let grid = Grid::new(24.0, 128).unwrap();
    let u0 = common::moving_pair(&grid);
    let base = std::f64::consts::TAU / 24.0;
    let xi = [2.0 * base, -base];
    let t = 0.6;
    let cfg = SolverConfig { t_end: t, ..Default::default() };
    let boosted_then_evolved = run(&galilean_boost(&u0, xi, 0.0).unwrap(), &cfg);
    let evolved_then_boosted = galilean_boost(&run(&u0, &cfg), xi, t).unwrap();
    let err = boosted_then_evolved.max_abs_diff(&evolved_then_boosted);
    assert!(err < 1e-8, "{err:e}");
    assert!(galilean_boost(&u0, [0.3, 0.0], t).is_err());
}

#[test]
fn scaling_covariance() {
    let grid = Grid::new(24.0, 128).unwrap();
    let u0 = common::moving_pair(&grid);
    let lambda: f64 = 1.6;
    let s = lambda * lambda;
    let (t, dt) = (0.5, 0.01);
    let cfg = SolverConfig { t_end: t, dt_max: dt, sample_interval: 0.1, ..Default::default() };
    let scaled_cfg = SolverConfig { t_end: t / s, dt_max: dt / s, sample_interval: 0.1 / s, ..cfg };
    let lhs = run(&rescale(&u0, lambda).unwrap(), &scaled_cfg);
    let rhs = rescale(&run(&u0, &cfg), lambda).unwrap();
    let err = lhs.max_abs_diff(&rhs) / rhs.max_abs();
    assert!(err < 1e-8, "{err:e}");
}

#[test]
fn monitors_see_every_sample_time() {
    let grid = Grid::new(16.0, 32).unwrap();
    let u0 = common::gaussian(&grid, finite_labels(2), 0.5);
    let mut times = Vec::new();
    let mut monitor = |t: f64, _: &Field| times.push(t);
    let cfg = SolverConfig { t_end: 0.5, dt_max: 0.03, sample_interval: 0.1, ..Default::default() };
    let out = evolve(&u0, &cfg, &mut [&mut monitor]).unwrap();
    assert_eq!(out.t_final, 0.5);
    let expected = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5];
    assert_eq!(times.len(), expected.len());
    for (a, b) in times.iter().zip(expected) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn final_sample_survives_rounding_of_the_interval_multiple() {
    // 3 * 0.1 exceeds 0.3 by one ulp
    let grid = Grid::new(16.0, 32).unwrap();
    let u0 = common::gaussian(&grid, vec![0], 0.5);
    let mut times = Vec::new();
    let mut monitor = |t: f64, _: &Field| times.push(t);
    let cfg = SolverConfig { t_end: 0.3, sample_interval: 0.1, ..Default::default() };
    evolve(&u0, &cfg, &mut [&mut monitor]).unwrap();
    assert_eq!(times.len(), 4, "{times:?}");
    assert_eq!(*times.last().unwrap(), 0.3);
}

#[test]
fn negative_energy_gaussian_blows_up() {
    let grid = Grid::new(16.0, 256).unwrap();
    let u0 = common::gaussian(&grid, vec![0], 8f64.sqrt());
    assert!(energy(&u0) < 0.0);
    // the sup norm the grid can still represent, about twice the initial peak here
    let threshold = 2.2062 / (6.0 * grid.spacing());
    let cfg = SolverConfig { t_end: 2.0, blowup_sup_threshold: Some(threshold), ..Default::default() };
    let out = evolve(&u0, &cfg, &mut []).unwrap();
    assert_eq!(out.status, EvolutionStatus::BlowupDetected);
    let info = out.blowup.unwrap();
    assert_eq!(info.reason, BlowupReason::SupThreshold);
    assert!(info.time < 2.0);
    assert!(info.sup_history.last().unwrap().1 > threshold);
    assert!(info.sup_history.windows(2).all(|w| w[0].0 < w[1].0));
}

#[test]
fn step_collapse_is_reported() {
    let grid = Grid::new(16.0, 128).unwrap();
    let u0 = common::gaussian(&grid, vec![0], 8f64.sqrt());
    let cfg = SolverConfig { t_end: 2.0, dt_min: 4e-3, ..Default::default() };
    let out = evolve(&u0, &cfg, &mut []).unwrap();
    assert_eq!(out.status, EvolutionStatus::BlowupDetected);
    assert_eq!(out.blowup.unwrap().reason, BlowupReason::StepCollapse);
}

#[test]
fn single_precision_run_conserves_mass_to_its_precision() {
    let grid = Grid32::new(20.0, 64).unwrap();
    let u0 = Field32::from_fn(&grid, vec![0, 1], |c, x, y| {
        Complex::from_polar((0.9 - 0.2 * c as f32) * (-(x * x + y * y) / 2.0).exp(), 0.2 * y)
    })
    .unwrap();
    let m0 = component_masses(&u0);
    let cfg = rnls_core::solver::SolverConfig::<f32> { t_end: 1.0, ..Default::default() };
    let out = evolve(&u0, &cfg, &mut []).unwrap();
    for (m, m0) in component_masses(&out.final_state).iter().zip(&m0) {
        assert!((m - m0).abs() / m0 < 1e-4);
    }
}
