//! Spatial norms and quadratures of vector fields.

use serde::Serialize;

use crate::field::VecField;
use crate::grid::{spectral_energy, Grid2D};
use crate::nonlinearity::quartic_functional;
use crate::real::Real;

/// Japanese bracket `⟨j⟩ = (1 + j^2)^{1/2}`.
pub fn japanese_bracket<T: Real>(j: i64) -> T {
    (T::one() + T::lit((j * j) as f64)).sqrt()
}

/// `‖u_j‖^2_{L^2}` for every component.
pub fn component_masses<T: Real>(u: &VecField<T>) -> Vec<T> {
    let grid = u.grid();
    u.components().map(|c| grid.integrate_by(|i| c[i].norm_sqr())).collect()
}

/// `M_{a,b,c}(u) = ∫ Σ_j (a + b j + c j^2) |u_j|^2`.
pub fn mass_abc<T: Real>(u: &VecField<T>, a: T, b: T, c: T) -> T {
    component_masses(u)
        .into_iter()
        .zip(u.labels())
        .map(|(m, &j)| {
            let jj = T::lit(j as f64);
            (a + b * jj + c * jj * jj) * m
        })
        .fold(T::zero(), |acc, v| acc + v)
}

/// `‖u‖_{L^2_x h^s} = (∫ Σ_j ⟨j⟩^{2s} |u_j|^2)^{1/2}` for integer `s`.
pub fn norm_l2h<T: Real>(u: &VecField<T>, s: u32) -> T {
    component_masses(u)
        .into_iter()
        .zip(u.labels())
        .map(|(m, &j)| japanese_bracket::<T>(j).powi(2 * s as i32) * m)
        .fold(T::zero(), |acc, v| acc + v)
        .sqrt()
}

/// `‖u‖^2_{L^2 l^2}`, the total mass.
pub fn mass<T: Real>(u: &VecField<T>) -> T {
    component_masses(u).into_iter().fold(T::zero(), |a, b| a + b)
}

/// `‖u‖_{L^4_x l^2} = (∫ (Σ_j |u_j|^2)^2)^{1/4}`.
pub fn norm_l4l2<T: Real>(u: &VecField<T>) -> T {
    let rho = u.density();
    u.grid().integrate_by(|i| rho[i] * rho[i]).sqrt().sqrt()
}

/// `‖∇u_j‖^2_{L^2}` per component, evaluated in spectral space.
pub fn component_grad_sq<T: Real>(u: &VecField<T>) -> Vec<T> {
    let grid = u.grid();
    u.components().map(|c| grad_sq_component(grid, c)).collect()
}

pub(crate) fn grad_sq_component<T: Real>(
    grid: &Grid2D<T>,
    comp: &[num_complex::Complex<T>],
) -> T {
    let mut spec = comp.to_vec();
    grid.fft_forward(&mut spec);
    for (idx, z) in spec.iter_mut().enumerate() {
        *z = *z * grid.k_squared(idx).sqrt();
    }
    spectral_energy(grid, &spec)
}

/// `‖∇u‖^2_{L^2 l^2}`.
pub fn grad_sq<T: Real>(u: &VecField<T>) -> T {
    component_grad_sq(u).into_iter().fold(T::zero(), |a, b| a + b)
}

/// `‖∇u‖_{L^2 l^2}`.
pub fn norm_grad_l2<T: Real>(u: &VecField<T>) -> T {
    grad_sq(u).sqrt()
}

/// Fraction of the total mass inside the central half box `|x|_∞ < L/4`.
pub fn central_mass_fraction<T: Real>(u: &VecField<T>) -> T {
    let grid = u.grid();
    let quarter = grid.length() / T::lit(4.0);
    let rho = u.density();
    let total = grid.integrate(&rho);
    if total == T::zero() {
        return T::one();
    }
    let inner = grid.integrate_by(|i| {
        let [x, y] = grid.position(i);
        if x.abs() < quarter && y.abs() < quarter {
            rho[i]
        } else {
            T::zero()
        }
    });
    inner / total
}

/// Mass fraction required inside the central half box for virial-type diagnostics.
pub const LOCALIZATION_FRACTION: f64 = 1.0 - 1e-6;

pub fn is_localized<T: Real>(u: &VecField<T>) -> bool {
    central_mass_fraction(u) >= T::lit(LOCALIZATION_FRACTION)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormReport<T> {
    pub l2h_0: T,
    pub l2h_1: T,
    pub grad_l2: T,
    pub l4l2: T,
    /// `𝒩(u)`, reported alongside so the `L^4 l^2` sandwich can be read off.
    pub quartic: T,
}

impl<T: Real> NormReport<T> {
    pub fn of(u: &VecField<T>) -> Self {
        Self {
            l2h_0: norm_l2h(u, 0),
            l2h_1: norm_l2h(u, 1),
            grad_l2: norm_grad_l2(u),
            l4l2: norm_l4l2(u),
            quartic: quartic_functional(u),
        }
    }
}
