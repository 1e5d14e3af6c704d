mod common;

use num_complex::Complex;
use rnls_core::diagnostics::{
    dispersion_fit, morawetz_action, morawetz_derivative, virial_chain, write_ndjson, DiagnosticsMonitor,
    ScatteringAccumulator,
};
use rnls_core::norms::norm_l4l2;
use rnls_core::solver::{evolve, linear_step};
use rnls_core::{finite_labels, Error, Field, Grid, MorawetzKernel, SolverConfig};

/// States of a fixed-step run at every multiple of `every`.
fn trajectory(u0: &Field, dt: f64, t_end: f64, every: f64) -> Vec<(f64, Field)> {
    let mut states = Vec::new();
    let mut monitor = |t: f64, u: &Field| states.push((t, u.clone()));
    let cfg = SolverConfig { sample_interval: every, ..SolverConfig::fixed_step(dt, t_end) };
    evolve(u0, &cfg, &mut [&mut monitor]).unwrap();
    states
}

fn state_at(states: &[(f64, Field)], t: f64) -> &Field {
    &states.iter().find(|(s, _)| (s - t).abs() < 1e-9).expect("sample time").1
}

#[test]
fn virial_second_derivative_converges_to_sixteen_energy() {
    let grid = Grid::new(24.0, 128).unwrap();
    let u0 = common::moving_pair(&grid);
    let (t0, h) = (0.2, 0.04);
    let mut errors = Vec::new();
    for dt in [0.02, 0.01, 0.005] {
        let states = trajectory(&u0, dt, t0 + h, h);
        let [a, b, c] = [t0 - h, t0, t0 + h].map(|t| virial_chain(state_at(&states, t), [0.0, 0.0]));
        assert!(a.localized && b.localized && c.localized);
        let second = (a.variance - 2.0 * b.variance + c.variance) / (h * h);
        let first = (c.variance - a.variance) / (2.0 * h);
        // V is quadratic in time, so the centered difference of V carries no truncation error
        assert!((first - b.virial_v1).abs() < 1e-4 * b.virial_v1.abs());
        errors.push(((second - b.sixteen_e) / b.sixteen_e).abs());
    }
    for w in errors.windows(2) {
        assert!((3.5..4.5).contains(&(w[0] / w[1])), "{errors:?}");
    }
    assert!(*errors.last().unwrap() < 1e-4);
}

#[test]
fn real_data_has_no_current() {
    let grid = Grid::new(24.0, 64).unwrap();
    let u = common::gaussian(&grid, finite_labels(3), 0.7);
    assert!(virial_chain(&u, [0.0, 0.0]).virial_v1.abs() < 1e-12);
    let k = MorawetzKernel::mollified_radial(&grid, None);
    assert!(morawetz_action(&u, &k).abs() < 1e-12);
}

#[test]
fn even_but_chirped_data_has_positive_action() {
    // evenness alone does not kill the action: an outgoing chirp makes it positive
    let grid = Grid::new(24.0, 64).unwrap();
    let u = Field::from_fn(&grid, vec![0], |_, x, y| {
        let r2 = x * x + y * y;
        Complex::from_polar((-r2 / 2.0).exp(), 0.2 * r2)
    })
    .unwrap();
    let k = MorawetzKernel::mollified_radial(&grid, None);
    assert!(morawetz_action(&u, &k) > 0.0);
}

#[test]
fn morawetz_rate_matches_the_four_term_formula() {
    let grid = Grid::new(24.0, 128).unwrap();
    let u0 = common::moving_pair(&grid);
    let kernel = MorawetzKernel::mollified_radial(&grid, None);
    let t0 = 0.2;
    let mut errors = Vec::new();
    let mut scale = 0.0;
    for dt in [0.02, 0.01, 0.005] {
        let h = 2.0 * dt;
        let states = trajectory(&u0, dt, t0 + h, dt);
        let rate = (morawetz_action(state_at(&states, t0 + h), &kernel)
            - morawetz_action(state_at(&states, t0 - h), &kernel))
            / (2.0 * h);
        let terms = morawetz_derivative(state_at(&states, t0), &kernel);
        scale = terms.hessian.abs() + terms.bilaplacian.abs() + terms.nonlinear.abs() + terms.momentum.abs();
        errors.push((rate - terms.total).abs());
    }
    for w in errors.windows(2) {
        assert!((3.5..4.5).contains(&(w[0] / w[1])), "{errors:?}");
    }
    assert!(*errors.last().unwrap() < 1e-3 * scale, "{errors:?} vs {scale}");
}

#[test]
fn correlations_match_direct_quadrature_on_a_small_grid() {
    let grid = Grid::new(8.0, 16).unwrap();
    let kernel = MorawetzKernel::mollified_radial(&grid, None);
    let mut rng = common::rng(31);
    for n in [1, 2, 3] {
        let u = common::random_smooth_field(&grid, finite_labels(n), &mut rng, 1.0);
        let fast = morawetz_action(&u, &kernel);
        let slow = common::direct_morawetz_action(&u, &kernel);
        assert!((fast - slow).abs() < 1e-10 * slow.abs().max(1.0), "{fast} vs {slow}");
        let fast = morawetz_derivative(&u, &kernel).total;
        let slow = common::direct_morawetz_derivative(&u, &kernel);
        assert!((fast - slow).abs() < 1e-10 * slow.abs().max(1.0), "{fast} vs {slow}");
    }
}

#[test]
fn sampled_kernel_reproduces_the_radial_one() {
    let grid = Grid::new(16.0, 32).unwrap();
    let radial = MorawetzKernel::mollified_radial(&grid, None);
    let sampled = MorawetzKernel::from_samples(&grid, radial.weight.clone());
    assert_eq!(sampled.grid().points(), 32);
    let u = common::random_smooth_field(&grid, finite_labels(2), &mut common::rng(32), 1.0);
    assert_eq!(morawetz_action(&u, &radial), morawetz_action(&u, &sampled));
    assert_eq!(morawetz_derivative(&u, &radial), morawetz_derivative(&u, &sampled));
}

#[test]
fn free_dispersion_rate() {
    let grid = Grid::new(128.0, 256).unwrap();
    let u0 = common::gaussian(&grid, vec![0], 1.0);
    let samples: Vec<(f64, f64)> =
        (0..=50).map(|i| 2.0 + 0.14 * i as f64).map(|t| (t, norm_l4l2(&linear_step(&u0, t)))).collect();
    let slope = dispersion_fit(&samples, 3.0, 8.0).unwrap();
    assert!((slope + 0.5).abs() < 0.05, "{slope}");
    assert!(matches!(dispersion_fit(&samples, 20.0, 30.0), Err(Error::WindowOutOfRange { .. })));
}

#[test]
fn small_data_accumulator_saturates() {
    let grid = Grid::new(96.0, 256).unwrap();
    let q_mass2 = 11.7008965246;
    let amplitude = (0.01 * q_mass2 / std::f64::consts::PI).sqrt();
    let u0 = common::gaussian(&grid, vec![0], amplitude);
    let mut acc = ScatteringAccumulator::new();
    let mut monitor = |t: f64, u: &Field| {
        acc.push(t, u);
    };
    let cfg = SolverConfig { t_end: 3.0, sample_interval: 0.05, ..Default::default() };
    evolve(&u0, &cfg, &mut [&mut monitor]).unwrap();
    assert!(acc.final_tenth_fraction() < 0.02, "{}", acc.final_tenth_fraction());
    assert!(acc.running().windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn monitor_stream_is_ordered_and_serializes_every_field() {
    let grid = Grid::new(24.0, 64).unwrap();
    let u0 = common::moving_pair(&grid);
    let mut monitor = DiagnosticsMonitor::new(&grid, true);
    let cfg = SolverConfig { t_end: 0.5, sample_interval: 0.1, ..Default::default() };
    evolve(&u0, &cfg, &mut [&mut monitor]).unwrap();
    let records = monitor.into_records();
    assert_eq!(records.len(), 6);
    assert!(records.windows(2).all(|w| w[0].t <= w[1].t && w[0].l4_accum <= w[1].l4_accum));
    let m0 = records[0].mass_abc["1,0,0"];
    for r in &records {
        assert!((r.mass_abc["1,0,0"] - m0).abs() < 1e-10 * m0);
        assert!(r.localized);
    }
    let mut buf = Vec::new();
    write_ndjson(&records, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), records.len());
    let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    for key in [
        "t", "mass_abc", "l2h_0", "l2h_1", "l2h_2", "energy", "variance", "virial_v1", "morawetz_M", "l4_accum",
        "sup_norm",
    ] {
        assert!(first.get(key).is_some(), "missing {key}");
    }
    assert_eq!(first["mass_abc"].as_object().unwrap().len(), 3);
}
