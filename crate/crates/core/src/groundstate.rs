//! Ground states of `ΔQ - Q + Q^3 = 0` and of the symmetric vector system.
//!
//! Two independent routes compute the scalar profile: a Petviashvili
//! fixed-point iteration on the periodic grid, and a shooting/bisection
//! solve of the radial ODE `Q'' + Q'/r - Q + Q^3 = 0`.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, IterateRecord, Result};
use crate::field::{finite_labels, VecField};
use crate::grid::{spectral_energy, Grid2D};
use crate::nonlinearity::apply_nonlinearity;
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GroundStateMethod {
    Petviashvili,
    RadialShooting,
}

#[derive(Debug, Clone)]
pub enum Profile<T: Real> {
    /// Single real component sampled on the periodic grid.
    Grid(VecField<T>),
    /// Uniformly spaced radial samples `q[n] = Q(n dr)` up to the truncation radius.
    Radial { dr: T, values: Vec<T>, slopes: Vec<T> },
}

#[derive(Debug, Clone)]
pub struct GroundState<T: Real> {
    pub profile: Profile<T>,
    /// `‖Q‖^2_{L^2}`.
    pub mass2: T,
    /// `‖∇Q‖^2_{L^2}`.
    pub grad2: T,
    /// `‖Q‖^4_{L^4}`.
    pub l4pow4: T,
    /// Sup norm of `ΔQ - Q + Q^3`.
    pub residual: T,
    pub peak: T,
    pub method: GroundStateMethod,
    pub iterations: usize,
}

/// Scalars of a ground state, the part written to JSON outputs.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GroundStateSummary {
    pub method: GroundStateMethod,
    pub mass2: f64,
    pub grad2: f64,
    pub l4pow4: f64,
    pub residual: f64,
    pub peak: f64,
    pub iterations: usize,
    pub pohozaev_grad: f64,
    pub pohozaev_l4: f64,
}

impl<T: Real> GroundState<T> {
    /// `‖∇Q‖^2 / ‖Q‖^2`, equal to 1 for the exact ground state.
    pub fn pohozaev_grad_ratio(&self) -> T {
        self.grad2 / self.mass2
    }

    /// `‖Q‖^4_{L^4} / (2‖Q‖^2)`, equal to 1 for the exact ground state.
    pub fn pohozaev_l4_ratio(&self) -> T {
        self.l4pow4 / (T::lit(2.0) * self.mass2)
    }

    /// `½‖∇Q‖^2 - ¼‖Q‖^4_{L^4}`, zero for the exact ground state.
    pub fn scalar_energy(&self) -> T {
        self.grad2 / T::lit(2.0) - self.l4pow4 / T::lit(4.0)
    }

    pub fn grid_profile(&self) -> Option<&VecField<T>> {
        match &self.profile {
            Profile::Grid(f) => Some(f),
            Profile::Radial { .. } => None,
        }
    }

    pub fn summary(&self) -> GroundStateSummary {
        GroundStateSummary {
            method: self.method,
            mass2: self.mass2.to_f64_lossy(),
            grad2: self.grad2.to_f64_lossy(),
            l4pow4: self.l4pow4.to_f64_lossy(),
            residual: self.residual.to_f64_lossy(),
            peak: self.peak.to_f64_lossy(),
            iterations: self.iterations,
            pohozaev_grad: self.pohozaev_grad_ratio().to_f64_lossy(),
            pohozaev_l4: self.pohozaev_l4_ratio().to_f64_lossy(),
        }
    }
}

/// Default Petviashvili stopping tolerance on the sup-norm iterate change.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Petviashvili iteration from the Gaussian seed `e^{-|x|^2/2}`.
pub fn solve_townes_petviashvili<T: Real>(
    grid: &Grid2D<T>,
    tol: T,
    max_iter: usize,
) -> Result<GroundState<T>> {
    let half = T::lit(0.5);
    let seed: Vec<T> = (0..grid.len())
        .map(|idx| {
            let [x, y] = grid.position(idx);
            (-(x * x + y * y) * half).exp()
        })
        .collect();
    petviashvili_from(grid, seed, tol, max_iter)
}

/// Petviashvili iteration `Q ← S^{3/2} (1-Δ)^{-1}[Q^3]` with
/// `S = ⟨(1-Δ)Q, Q⟩ / ⟨Q^3, Q⟩`, started from `seed`.
pub fn petviashvili_from<T: Real>(
    grid: &Grid2D<T>,
    seed: Vec<T>,
    tol: T,
    max_iter: usize,
) -> Result<GroundState<T>> {
    if seed.len() != grid.len() {
        return Err(Error::DimensionMismatch { expected: grid.len(), found: seed.len() });
    }
    let symbol: Vec<T> = (0..grid.len()).map(|i| T::one() + grid.k_squared(i)).collect();
    let exponent = T::lit(1.5);
    let mut q = seed;
    let mut history: Vec<IterateRecord> = Vec::new();
    for iteration in 1..=max_iter {
        let mut q_hat: Vec<Complex<T>> = q.iter().map(|&v| Complex::new(v, T::zero())).collect();
        grid.fft_forward(&mut q_hat);
        let mut cube_hat: Vec<Complex<T>> =
            q.iter().map(|&v| Complex::new(v * v * v, T::zero())).collect();
        grid.fft_forward(&mut cube_hat);

        let numerator = crate::real::pairwise_sum_by(grid.len(), &|i| symbol[i] * q_hat[i].norm_sqr());
        let denominator =
            crate::real::pairwise_sum_by(grid.len(), &|i| (cube_hat[i] * q_hat[i].conj()).re);
        let factor = numerator / denominator;
        if !(denominator > T::zero()) || !factor.is_finite() {
            history.push(IterateRecord {
                iteration,
                factor: factor.to_f64_lossy(),
                change: f64::NAN,
            });
            return Err(Error::Collapse { iteration, factor: factor.to_f64_lossy(), history });
        }
        let scale = factor.powf(exponent);
        for (z, &s) in cube_hat.iter_mut().zip(&symbol) {
            *z = *z * (scale / s);
        }
        grid.fft_inverse(&mut cube_hat);
        let next: Vec<T> = cube_hat.iter().map(|z| z.re).collect();
        let change = next.iter().zip(&q).map(|(a, b)| (*a - *b).abs()).fold(T::zero(), T::max);
        history.push(IterateRecord {
            iteration,
            factor: factor.to_f64_lossy(),
            change: change.to_f64_lossy(),
        });
        q = next;
        if !change.is_finite() || q.iter().all(|v| v.abs() < T::epsilon()) {
            return Err(Error::Collapse { iteration, factor: factor.to_f64_lossy(), history });
        }
        if change < tol {
            return Ok(certify_grid_profile(grid, q, iteration));
        }
    }
    let last_change = history.last().map(|r| r.change).unwrap_or(f64::NAN);
    Err(Error::NotConverged { iterations: max_iter, last_change, history })
}

fn certify_grid_profile<T: Real>(grid: &Grid2D<T>, q: Vec<T>, iterations: usize) -> GroundState<T> {
    let field: Vec<Complex<T>> = q.iter().map(|&v| Complex::new(v, T::zero())).collect();
    let mut spec = field.clone();
    grid.fft_forward(&mut spec);
    let mass2 = spectral_energy(grid, &spec);
    let grad_spec: Vec<_> = spec
        .iter()
        .enumerate()
        .map(|(i, z)| *z * grid.k_squared(i).sqrt())
        .collect();
    let grad2 = spectral_energy(grid, &grad_spec);
    let l4pow4 = grid.integrate_by(|i| q[i] * q[i] * q[i] * q[i]);
    let lap = grid.laplacian(&field);
    let residual = lap
        .iter()
        .zip(&q)
        .map(|(l, &v)| (l.re - v + v * v * v).abs())
        .fold(T::zero(), T::max);
    let peak = q.iter().copied().fold(T::zero(), T::max);
    GroundState {
        profile: Profile::Grid(VecField::scalar(grid, &q).expect("grid-sized profile")),
        mass2,
        grad2,
        l4pow4,
        residual,
        peak,
        method: GroundStateMethod::Petviashvili,
        iterations,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shot {
    /// Turns back up while still positive: initial value too small.
    Undershoot,
    /// Crosses zero: initial value too large.
    Overshoot,
    /// Reached the end of the interval without deciding.
    Undecided,
}

struct Trajectory<T> {
    values: Vec<T>,
    slopes: Vec<T>,
    outcome: Shot,
}

fn radial_rhs<T: Real>(r: T, q: T, p: T) -> (T, T) {
    (p, q - q * q * q - p / r)
}

/// RK4 integration from `r = 0` with a series start; stops at the first
/// undershoot/overshoot event or at `r_max`.
fn shoot<T: Real>(q0: T, r_max: T, dr: T) -> Trajectory<T> {
    let steps = (r_max / dr).ceil().to_usize().unwrap_or(0);
    let c2 = (q0 - q0 * q0 * q0) / T::lit(4.0);
    let c4 = c2 * (T::one() - T::lit(3.0) * q0 * q0) / T::lit(16.0);
    let mut values = vec![q0];
    let mut slopes = vec![T::zero()];
    let (mut q, mut p) = (
        q0 + c2 * dr * dr + c4 * dr.powi(4),
        T::lit(2.0) * c2 * dr + T::lit(4.0) * c4 * dr.powi(3),
    );
    values.push(q);
    slopes.push(p);
    let half = dr / T::lit(2.0);
    let sixth = dr / T::lit(6.0);
    let two = T::lit(2.0);
    for n in 1..steps {
        let r = T::of_usize(n) * dr;
        let (k1q, k1p) = radial_rhs(r, q, p);
        let (k2q, k2p) = radial_rhs(r + half, q + half * k1q, p + half * k1p);
        let (k3q, k3p) = radial_rhs(r + half, q + half * k2q, p + half * k2p);
        let (k4q, k4p) = radial_rhs(r + dr, q + dr * k3q, p + dr * k3p);
        q = q + sixth * (k1q + two * k2q + two * k3q + k4q);
        p = p + sixth * (k1p + two * k2p + two * k3p + k4p);
        if q < T::zero() {
            return Trajectory { values, slopes, outcome: Shot::Overshoot };
        }
        if p > T::zero() {
            return Trajectory { values, slopes, outcome: Shot::Undershoot };
        }
        values.push(q);
        slopes.push(p);
    }
    Trajectory { values, slopes, outcome: Shot::Undecided }
}

/// Radial shooting: bisection on `Q(0)` between an undershooting and an
/// overshooting initial value, giving the node-free ground state.
pub fn solve_townes_shooting<T: Real>(r_max: T, dr: T) -> Result<GroundState<T>> {
    if !(r_max >= T::lit(15.0)) {
        return Err(Error::InvalidConfig(format!("r_max must be at least 15, got {r_max}")));
    }
    if !(dr > T::zero()) || dr > T::lit(0.05) {
        return Err(Error::InvalidConfig(format!("radial step must lie in (0, 0.05], got {dr}")));
    }
    let (mut lo, mut hi) = (T::lit(1.5), T::lit(3.0));
    for _ in 0..8 {
        if shoot(lo, r_max, dr).outcome == Shot::Undershoot {
            break;
        }
        lo = (lo + T::one()) / T::lit(2.0);
    }
    for _ in 0..8 {
        if shoot(hi, r_max, dr).outcome == Shot::Overshoot {
            break;
        }
        hi = hi * T::lit(1.5);
    }
    if shoot(lo, r_max, dr).outcome != Shot::Undershoot
        || shoot(hi, r_max, dr).outcome != Shot::Overshoot
    {
        return Err(Error::BracketNotFound(format!("no sign change between Q(0)={lo} and {hi}")));
    }
    let mut iterations = 0;
    while iterations < 200 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        match shoot(mid, r_max, dr).outcome {
            Shot::Undershoot => lo = mid,
            Shot::Overshoot => hi = mid,
            Shot::Undecided => {
                lo = mid;
                break;
            }
        }
    }
    // The undershooting side stays positive and node-free up to its turning point.
    let traj = shoot(lo, r_max, dr);
    Ok(certify_radial_profile(traj.values, traj.slopes, dr, iterations))
}

fn certify_radial_profile<T: Real>(
    values: Vec<T>,
    slopes: Vec<T>,
    dr: T,
    iterations: usize,
) -> GroundState<T> {
    let tau = T::TAU();
    let radius = |n: usize| T::of_usize(n) * dr;
    let mass2 = tau * simpson(&values, dr, |n, q| q * q * radius(n));
    let grad2 = tau * simpson(&slopes, dr, |n, p| p * p * radius(n));
    let l4pow4 = tau * simpson(&values, dr, |n, q| q.powi(4) * radius(n));

    // Q'' from a fourth-order central difference of Q'.
    let twelve = T::lit(12.0);
    let eight = T::lit(8.0);
    let mut residual = T::zero();
    for n in 2..slopes.len().saturating_sub(2) {
        let dp = (slopes[n - 2] - eight * slopes[n - 1] + eight * slopes[n + 1] - slopes[n + 2])
            / (twelve * dr);
        let q = values[n];
        let res = dp + slopes[n] / radius(n) - q + q * q * q;
        residual = residual.max(res.abs());
    }
    let peak = values[0];
    GroundState {
        profile: Profile::Radial { dr, values, slopes },
        mass2,
        grad2,
        l4pow4,
        residual,
        peak,
        method: GroundStateMethod::RadialShooting,
        iterations,
    }
}

/// Composite Simpson rule of `f(n, samples[n])` on a uniform mesh; a
/// trailing odd interval is closed with the trapezoid rule.
fn simpson<T: Real, F: Fn(usize, T) -> T>(samples: &[T], h: T, f: F) -> T {
    let n = samples.len();
    if n < 2 {
        return T::zero();
    }
    let vals: Vec<T> = samples.iter().enumerate().map(|(i, &s)| f(i, s)).collect();
    let intervals = n - 1;
    let even = intervals - intervals % 2;
    let mut acc = T::zero();
    let (two, four) = (T::lit(2.0), T::lit(4.0));
    for i in (0..even).step_by(2) {
        acc = acc + vals[i] + four * vals[i + 1] + vals[i + 2];
    }
    let mut total = acc * h / T::lit(3.0);
    if even < intervals {
        total = total + (vals[even] + vals[even + 1]) * h / two;
    }
    total
}

/// `N` identical components `(2N-1)^{-1/2} Q` solving the Euler–Lagrange system.
#[derive(Debug, Clone)]
pub struct VectorGroundState<T: Real> {
    pub n: usize,
    pub components: VecField<T>,
    /// Per-component sup norm of `ΔQ_j - Q_j + F_j(Q)`.
    pub el_residuals: Vec<T>,
}

pub fn build_vector_ground_state<T: Real>(
    q: &GroundState<T>,
    n: usize,
) -> Result<VectorGroundState<T>> {
    build_vector_ground_state_with_labels(q, finite_labels(n))
}

/// Vector ground state on an arbitrary label set (for symmetric truncations).
pub fn build_vector_ground_state_with_labels<T: Real>(
    q: &GroundState<T>,
    labels: Vec<i64>,
) -> Result<VectorGroundState<T>> {
    let n = labels.len();
    if n == 0 {
        return Err(Error::InvalidLabels("vector ground state needs N >= 1".into()));
    }
    let profile = q.grid_profile().ok_or_else(|| {
        Error::InvalidConfig("vector ground state requires a grid-sampled profile".into())
    })?;
    let grid = profile.grid();
    let scale = (T::one() / T::of_usize(2 * n - 1)).sqrt();
    let base = profile.component(0);
    let components = VecField::from_components(
        grid,
        labels,
        (0..n).map(|_| base.iter().map(|z| *z * scale).collect()).collect(),
    )?;
    let el_residuals = euler_lagrange_residuals(&components);
    Ok(VectorGroundState { n, components, el_residuals })
}

/// Sup norm per component of `Δu_j - u_j + F_j(u)`.
pub fn euler_lagrange_residuals<T: Real>(u: &VecField<T>) -> Vec<T> {
    let grid = u.grid();
    let f = apply_nonlinearity(u);
    (0..u.n_components())
        .map(|c| {
            let lap = grid.laplacian(u.component(c));
            lap.iter()
                .zip(u.component(c))
                .zip(f.component(c))
                .map(|((l, v), fv)| (*l - *v + *fv).norm())
                .fold(T::zero(), T::max)
        })
        .collect()
}
