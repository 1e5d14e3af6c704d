mod common;

use proptest::prelude::*;
use rnls_core::norms::{component_masses, grad_sq, mass, mass_abc, norm_l2h, norm_l4l2, NormReport};
use rnls_core::Grid;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn weighted_norms_increase_with_the_weight(seed in 0u64..1000, shift in -4i64..4, n in 1usize..5) {
        let grid = Grid::new(12.0, 16).unwrap();
        let labels: Vec<i64> = (0..n as i64).map(|k| k + shift).collect();
        let u = common::random_field(&grid, labels, &mut common::rng(seed));
        let (a, b, c) = (norm_l2h(&u, 0), norm_l2h(&u, 1), norm_l2h(&u, 2));
        prop_assert!(a <= b && b <= c);
        prop_assert!((a * a - mass(&u)).abs() < 1e-12 * mass(&u));
    }

    #[test]
    fn mass_family_is_linear_in_the_probe(seed in 0u64..1000, p in -3.0..3.0f64, q in -3.0..3.0f64, r in -3.0..3.0f64) {
        let grid = Grid::new(5.0, 8).unwrap();
        let u = common::random_field(&grid, vec![-1, 0, 1, 2], &mut common::rng(seed));
        let combined = mass_abc(&u, p, q, r);
        let split = p * mass_abc(&u, 1.0, 0.0, 0.0) + q * mass_abc(&u, 0.0, 1.0, 0.0) + r * mass_abc(&u, 0.0, 0.0, 1.0);
        prop_assert!((combined - split).abs() < 1e-11 * (1.0 + combined.abs()));
        let total: f64 = component_masses(&u).iter().sum();
        prop_assert!((mass_abc(&u, 1.0, 0.0, 0.0) - total).abs() < 1e-12 * total);
    }

    #[test]
    fn interpolation_inequality(seed in 0u64..1000, n in 1usize..5) {
        // ‖u‖^4_{L^4 l^2} ≤ 𝒩(u) ≤ C_1 ‖u‖^2 ‖∇u‖^2 with C_1 = 2/‖Q‖^2
        let grid = Grid::new(16.0, 64).unwrap();
        let u = common::random_smooth_field(&grid, rnls_core::finite_labels(n), &mut common::rng(seed), 1.0);
        let ratio = norm_l4l2(&u).powi(4) / (mass(&u) * grad_sq(&u));
        prop_assert!(ratio < 2.0 / 11.7008965246);
    }
}

#[test]
fn report_collects_every_norm() {
    let grid = Grid::new(16.0, 64).unwrap();
    let u = common::gaussian(&grid, vec![0, 1], 1.0);
    let r = NormReport::of(&u);
    let pi = std::f64::consts::PI;
    // two copies of e^{-|x|^2/2}: mass 2π, gradient 2π, ∫S^2 = ∫4e^{-2|x|^2} = 2π
    assert!((r.l2h_0 * r.l2h_0 - 2.0 * pi).abs() < 1e-12);
    assert!((r.l2h_1 * r.l2h_1 - 3.0 * pi).abs() < 1e-12);
    assert!((r.grad_l2 * r.grad_l2 - 2.0 * pi).abs() < 1e-10);
    assert!((r.l4l2.powi(4) - 2.0 * pi).abs() < 1e-12);
    // 𝒩 = ∫2S^2 - Σρ_j^2 = 4π - π
    assert!((r.quartic - 3.0 * pi).abs() < 1e-12);
}
