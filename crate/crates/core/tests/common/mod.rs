#![allow(dead_code)]

use num_complex::Complex;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rnls_core::diagnostics::{morawetz_densities, MorawetzKernel};
use rnls_core::{Field, Grid};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent complex normal-ish samples in every cell; no smoothness.
pub fn random_field(grid: &Grid, labels: Vec<i64>, rng: &mut ChaCha8Rng) -> Field {
    let comps = (0..labels.len())
        .map(|_| {
            (0..grid.len())
                .map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect()
        })
        .collect();
    Field::from_components(grid, labels, comps).unwrap()
}

/// Sum of a few randomly placed, randomly modulated Gaussian bumps per component.
pub fn random_smooth_field(grid: &Grid, labels: Vec<i64>, rng: &mut ChaCha8Rng, amplitude: f64) -> Field {
    let n = labels.len();
    let bumps: Vec<Vec<[f64; 6]>> = (0..n)
        .map(|_| {
            (0..3)
                .map(|_| {
                    [
                        rng.random_range(-1.5..1.5),
                        rng.random_range(-1.5..1.5),
                        rng.random_range(0.8..1.5),
                        rng.random_range(-0.5..0.5),
                        rng.random_range(-0.5..0.5),
                        rng.random_range(0.0..std::f64::consts::TAU),
                    ]
                })
                .collect()
        })
        .collect();
    Field::from_fn(grid, labels, |c, x, y| {
        bumps[c]
            .iter()
            .map(|&[cx, cy, w, kx, ky, ph]| {
                let r2 = (x - cx).powi(2) + (y - cy).powi(2);
                Complex::from_polar(amplitude * (-r2 / (2.0 * w * w)).exp(), kx * x + ky * y + ph)
            })
            .sum()
    })
    .unwrap()
}

/// `A e^{-|x|^2/2}` in every component.
pub fn gaussian(grid: &Grid, labels: Vec<i64>, amplitude: f64) -> Field {
    Field::from_fn(grid, labels, |_, x, y| Complex::new(amplitude * (-(x * x + y * y) / 2.0).exp(), 0.0)).unwrap()
}

/// Two-component localized data with a nonzero current.
pub fn moving_pair(grid: &Grid) -> Field {
    Field::from_fn(grid, vec![0, 1], |c, x, y| {
        if c == 0 {
            Complex::from_polar(0.8 * (-(x * x + y * y) / 2.0).exp(), 0.3 * x)
        } else {
            Complex::new(0.6 * (-((x - 1.0).powi(2) + y * y) / 3.0).exp(), 0.0)
        }
    })
    .unwrap()
}

fn offset(grid: &Grid, ix: usize, iy: usize, jx: usize, jy: usize) -> usize {
    let m = grid.points() as isize;
    let p = (ix as isize - jx as isize).rem_euclid(m) as usize;
    let q = (iy as isize - jy as isize).rem_euclid(m) as usize;
    p * m as usize + q
}

/// `∬ K(x-y) f(x) g(y)` by direct double summation over the grid.
fn direct_pair(grid: &Grid, kernel: &[f64], f: &[f64], g: &[f64]) -> f64 {
    let m = grid.points();
    let da = grid.cell_area();
    let mut total = 0.0;
    for ix in 0..m {
        for iy in 0..m {
            let fx = f[ix * m + iy];
            for jx in 0..m {
                for jy in 0..m {
                    total += kernel[offset(grid, ix, iy, jx, jy)] * fx * g[jx * m + jy];
                }
            }
        }
    }
    total * da * da
}

/// Direct `O(M^4)` evaluation of the Morawetz action.
pub fn direct_morawetz_action(u: &Field, kernel: &MorawetzKernel<f64>) -> f64 {
    let d = morawetz_densities(u);
    let g = u.grid();
    2.0 * (direct_pair(g, &kernel.gradient[0], &d.momentum[0], &d.rho)
        + direct_pair(g, &kernel.gradient[1], &d.momentum[1], &d.rho))
}

/// Direct `O(M^4)` evaluation of the four-term derivative.
pub fn direct_morawetz_derivative(u: &Field, kernel: &MorawetzKernel<f64>) -> f64 {
    let d = morawetz_densities(u);
    let g = u.grid();
    let hessian = 4.0
        * (direct_pair(g, &kernel.hessian[0], &d.stress[0], &d.rho)
            + 2.0 * direct_pair(g, &kernel.hessian[1], &d.stress[1], &d.rho)
            + direct_pair(g, &kernel.hessian[2], &d.stress[2], &d.rho));
    let bilaplacian = -direct_pair(g, &kernel.bilaplacian, &d.rho, &d.rho);
    let nonlinear = -direct_pair(g, &kernel.laplacian, &d.quartic, &d.rho);
    let momentum = -4.0
        * (direct_pair(g, &kernel.gradient[0], &d.momentum[0], &d.momentum_divergence)
            + direct_pair(g, &kernel.gradient[1], &d.momentum[1], &d.momentum_divergence));
    hessian + bilaplacian + nonlinear + momentum
}
