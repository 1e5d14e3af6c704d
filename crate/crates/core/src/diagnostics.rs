//! Monitored functionals: conserved quantities, the virial chain, the
//! interaction Morawetz action and its derivative, and the space-time
//! `L^4 l^2` accumulator.
//!
//! Two-point integrals `∬ K(x-y) f(x) g(y)` are evaluated as circular
//! correlations on the grid through the transform, `O(M^2 log M)`.

use std::collections::BTreeMap;
use std::io::Write;

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::VecField;
use crate::grid::Grid2D;
use crate::nonlinearity::quartic_density;
use crate::norms::{is_localized, mass_abc, norm_l2h, norm_l4l2};
use crate::real::Real;
use crate::solver::Monitor;
use crate::variational::energy;

/// Inner edge of the taper, as a fraction of the box length.
const TAPER_START: f64 = 0.4;

fn bump<T: Real>(t: T) -> T {
    if t <= T::zero() {
        T::zero()
    } else {
        (-T::one() / t).exp()
    }
}

fn bump_slope<T: Real>(t: T) -> T {
    if t <= T::zero() {
        T::zero()
    } else {
        bump(t) / (t * t)
    }
}

/// Smooth cutoff equal to 1 for `|s| ≤ 0.4L` and 0 for `|s| ≥ 0.5L`,
/// returned with its derivative.
pub fn edge_taper<T: Real>(s: T, length: T) -> (T, T) {
    let start = T::lit(TAPER_START) * length;
    let width = length / T::lit(2.0) - start;
    let t = (s.abs() - start) / width;
    if t <= T::zero() {
        return (T::one(), T::zero());
    }
    if t >= T::one() {
        return (T::zero(), T::zero());
    }
    let (f0, f1) = (bump(T::one() - t), bump(t));
    let (d0, d1) = (bump_slope(T::one() - t), bump_slope(t));
    let den = f0 + f1;
    let value = f0 / den;
    let dt = (-d0 * f1 - f0 * d1) / (den * den);
    (value, dt / width * s.signum())
}

fn wrap<T: Real>(d: T, length: T) -> T {
    let half = length / T::lit(2.0);
    let mut v = d;
    while v >= half {
        v = v - length;
    }
    while v < -half {
        v = v + length;
    }
    v
}

/// Momentum density `P = Σ_j Im(ū_j ∇u_j)` as two real arrays.
pub fn momentum_density<T: Real>(u: &VecField<T>) -> [Vec<T>; 2] {
    let grid = u.grid();
    let mut p = [vec![T::zero(); grid.len()], vec![T::zero(); grid.len()]];
    for comp in u.components() {
        let grad = grid.gradient(comp);
        for axis in 0..2 {
            for ((acc, z), g) in p[axis].iter_mut().zip(comp).zip(&grad[axis]) {
                *acc = *acc + (z.conj() * g).im;
            }
        }
    }
    p
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VirialChain<T> {
    /// `V = ∫ w Σ_j|u_j|^2` with `w ≈ |x-c|^2`.
    pub variance: T,
    /// `dV/dt = 2∫ ∇w·P`, which is `4∫(x-c)·P` where the taper is inactive.
    pub virial_v1: T,
    pub sixteen_e: T,
    pub localized: bool,
}

/// Variance, its time derivative and `16E`, with `|x-c|^2` tapered to zero
/// in the outer shell of the box.
pub fn virial_chain<T: Real>(u: &VecField<T>, center: [T; 2]) -> VirialChain<T> {
    let grid = u.grid();
    let length = grid.length();
    let rho = u.density();
    let p = momentum_density(u);
    let two = T::lit(2.0);
    let weight = |idx: usize| {
        let [x, y] = grid.position(idx);
        let (dx, dy) = (wrap(x - center[0], length), wrap(y - center[1], length));
        let (cx, sx) = edge_taper(dx, length);
        let (cy, sy) = edge_taper(dy, length);
        let r2 = dx * dx + dy * dy;
        let w = r2 * cx * cy;
        let gx = two * dx * cx * cy + r2 * sx * cy;
        let gy = two * dy * cx * cy + r2 * cx * sy;
        (w, gx, gy)
    };
    let variance = grid.integrate_by(|i| weight(i).0 * rho[i]);
    let virial_v1 = grid.integrate_by(|i| {
        let (_, gx, gy) = weight(i);
        two * (gx * p[0][i] + gy * p[1][i])
    });
    VirialChain {
        variance,
        virial_v1,
        sixteen_e: T::lit(16.0) * energy(u),
        localized: is_localized(u),
    }
}

/// Samples of the Morawetz weight `a` and its derivatives on lattice
/// displacements, plus their spectra for correlation.
#[derive(Debug, Clone)]
pub struct MorawetzKernel<T: Real> {
    grid: Grid2D<T>,
    /// Indexed by displacement offset `(p, q)` ↦ `p*M + q`, with signed offsets.
    pub weight: Vec<T>,
    pub gradient: [Vec<T>; 2],
    /// `∂_xx a`, `∂_xy a`, `∂_yy a`.
    pub hessian: [Vec<T>; 3],
    pub laplacian: Vec<T>,
    pub bilaplacian: Vec<T>,
    spectra: KernelSpectra<T>,
}

#[derive(Debug, Clone)]
struct KernelSpectra<T> {
    gradient: [Vec<Complex<T>>; 2],
    hessian: [Vec<Complex<T>>; 3],
    laplacian: Vec<Complex<T>>,
    bilaplacian: Vec<Complex<T>>,
}

impl<T: Real> MorawetzKernel<T> {
    /// `a(d) = (|d|^2 + ε^2)^{1/2}`, tapered at the box edge; `ε` defaults to `2dx`.
    pub fn mollified_radial(grid: &Grid2D<T>, eps: Option<T>) -> Self {
        let eps = eps.unwrap_or_else(|| T::lit(2.0) * grid.spacing());
        let m = grid.points();
        let length = grid.length();
        let samples = (0..grid.len())
            .map(|idx| {
                let (dx, dy) = (grid.displacement(idx / m), grid.displacement(idx % m));
                let taper = edge_taper(dx, length).0 * edge_taper(dy, length).0;
                (dx * dx + dy * dy + eps * eps).sqrt() * taper
            })
            .collect();
        Self::from_samples(grid, samples)
    }

    /// Kernel from arbitrary weight samples on lattice displacements.
    /// Derivatives are spectral derivatives of the trigonometric interpolant.
    pub fn from_samples(grid: &Grid2D<T>, weight: Vec<T>) -> Self {
        assert_eq!(weight.len(), grid.len());
        let mut spec: Vec<Complex<T>> = weight.iter().map(|&v| Complex::new(v, T::zero())).collect();
        grid.fft_forward(&mut spec);
        let derive = |symbol: &dyn Fn([T; 2]) -> Complex<T>| -> Vec<T> {
            let mut out: Vec<Complex<T>> = spec
                .iter()
                .enumerate()
                .map(|(i, z)| *z * symbol(grid.wavevector(i)))
                .collect();
            grid.fft_inverse(&mut out);
            out.into_iter().map(|z| z.re).collect()
        };
        let i = |v: T| Complex::new(T::zero(), v);
        let r = |v: T| Complex::new(v, T::zero());
        let gradient = [derive(&|k| i(k[0])), derive(&|k| i(k[1]))];
        let hessian = [
            derive(&|k| r(-k[0] * k[0])),
            derive(&|k| r(-k[0] * k[1])),
            derive(&|k| r(-k[1] * k[1])),
        ];
        let laplacian = derive(&|k| r(-(k[0] * k[0] + k[1] * k[1])));
        let bilaplacian = derive(&|k| {
            let k2 = k[0] * k[0] + k[1] * k[1];
            r(k2 * k2)
        });
        let to_spec = |v: &[T]| {
            let mut s: Vec<Complex<T>> = v.iter().map(|&x| Complex::new(x, T::zero())).collect();
            grid.fft_forward(&mut s);
            s
        };
        let spectra = KernelSpectra {
            gradient: [to_spec(&gradient[0]), to_spec(&gradient[1])],
            hessian: [to_spec(&hessian[0]), to_spec(&hessian[1]), to_spec(&hessian[2])],
            laplacian: to_spec(&laplacian),
            bilaplacian: to_spec(&bilaplacian),
        };
        Self { grid: grid.clone(), weight, gradient, hessian, laplacian, bilaplacian, spectra }
    }

    pub fn grid(&self) -> &Grid2D<T> {
        &self.grid
    }
}

/// `(K ⋆ g)(x) = ∫ K(x-y) g(y) dy` as a circular correlation on the grid.
fn correlate<T: Real>(grid: &Grid2D<T>, kernel_spec: &[Complex<T>], g_spec: &[Complex<T>]) -> Vec<T> {
    let mut out: Vec<Complex<T>> = kernel_spec.iter().zip(g_spec).map(|(a, b)| a * b).collect();
    grid.fft_inverse(&mut out);
    let da = grid.cell_area();
    out.into_iter().map(|z| z.re * da).collect()
}

fn real_spectrum<T: Real>(grid: &Grid2D<T>, v: &[T]) -> Vec<Complex<T>> {
    let mut s: Vec<Complex<T>> = v.iter().map(|&x| Complex::new(x, T::zero())).collect();
    grid.fft_forward(&mut s);
    s
}

/// `M(t) = 2 Σ_{j,j'} ∬ |u_{j'}(y)|^2 ∇a(x-y)·Im(ū_j∇u_j)(x) dx dy`.
pub fn morawetz_action<T: Real>(u: &VecField<T>, kernel: &MorawetzKernel<T>) -> T {
    let grid = u.grid();
    let rho_spec = real_spectrum(grid, &u.density());
    let p = momentum_density(u);
    let cx = correlate(grid, &kernel.spectra.gradient[0], &rho_spec);
    let cy = correlate(grid, &kernel.spectra.gradient[1], &rho_spec);
    T::lit(2.0) * grid.integrate_by(|i| p[0][i] * cx[i] + p[1][i] * cy[i])
}

/// The four contributions to `dM/dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MorawetzTerms<T> {
    /// `4 Σ ∬ ∂_k∂_l a(x-y) Re(∂_k u_j ∂_l ū_j)(x) |u_{j'}(y)|^2`.
    pub hessian: T,
    /// `-∬ Δ^2 a(x-y) ρ(x) ρ(y)`.
    pub bilaplacian: T,
    /// `-∬ Δa(x-y) ρ(y) Σ_j ū_j F_j(x)`.
    pub nonlinear: T,
    /// `-4 ∬ ∂_l a(x-y) P_l(x) ∂_k P_k(y)`.
    pub momentum: T,
    pub total: T,
}

/// Pointwise building blocks of the Morawetz derivative, exposed so that
/// reference quadratures can reuse them.
#[derive(Debug, Clone)]
pub struct MorawetzDensities<T> {
    pub rho: Vec<T>,
    pub momentum: [Vec<T>; 2],
    pub momentum_divergence: Vec<T>,
    /// `R_xx, R_xy, R_yy` with `R_kl = Σ_j Re(∂_k u_j ∂_l ū_j)`.
    pub stress: [Vec<T>; 3],
    pub quartic: Vec<T>,
}

pub fn morawetz_densities<T: Real>(u: &VecField<T>) -> MorawetzDensities<T> {
    let grid = u.grid();
    let n = grid.len();
    let mut stress = [vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]];
    for comp in u.components() {
        let [gx, gy] = grid.gradient(comp);
        for i in 0..n {
            stress[0][i] = stress[0][i] + gx[i].norm_sqr();
            stress[1][i] = stress[1][i] + (gx[i] * gy[i].conj()).re;
            stress[2][i] = stress[2][i] + gy[i].norm_sqr();
        }
    }
    let momentum = momentum_density(u);
    let dx = grid.derivative(&to_complex(&momentum[0]), 0);
    let dy = grid.derivative(&to_complex(&momentum[1]), 1);
    let momentum_divergence = dx.iter().zip(&dy).map(|(a, b)| a.re + b.re).collect();
    MorawetzDensities {
        rho: u.density(),
        momentum,
        momentum_divergence,
        stress,
        quartic: quartic_density(u),
    }
}

fn to_complex<T: Real>(v: &[T]) -> Vec<Complex<T>> {
    v.iter().map(|&x| Complex::new(x, T::zero())).collect()
}

/// Right-hand side of the interaction Morawetz identity for a general weight.
pub fn morawetz_derivative<T: Real>(u: &VecField<T>, kernel: &MorawetzKernel<T>) -> MorawetzTerms<T> {
    let grid = u.grid();
    let d = morawetz_densities(u);
    let rho_spec = real_spectrum(grid, &d.rho);
    let sp = &kernel.spectra;
    let h: Vec<Vec<T>> = sp.hessian.iter().map(|k| correlate(grid, k, &rho_spec)).collect();
    let hessian = T::lit(4.0)
        * grid.integrate_by(|i| {
            d.stress[0][i] * h[0][i] + T::lit(2.0) * d.stress[1][i] * h[1][i] + d.stress[2][i] * h[2][i]
        });
    let b = correlate(grid, &sp.bilaplacian, &rho_spec);
    let bilaplacian = -grid.integrate_by(|i| d.rho[i] * b[i]);
    let l = correlate(grid, &sp.laplacian, &rho_spec);
    let nonlinear = -grid.integrate_by(|i| d.quartic[i] * l[i]);
    let div_spec = real_spectrum(grid, &d.momentum_divergence);
    let gx = correlate(grid, &sp.gradient[0], &div_spec);
    let gy = correlate(grid, &sp.gradient[1], &div_spec);
    let momentum = -T::lit(4.0) * grid.integrate_by(|i| d.momentum[0][i] * gx[i] + d.momentum[1][i] * gy[i]);
    MorawetzTerms {
        hessian,
        bilaplacian,
        nonlinear,
        momentum,
        total: hessian + bilaplacian + nonlinear + momentum,
    }
}

/// Running trapezoidal integral of `‖u(t)‖^4_{L^4 l^2}`.
#[derive(Debug, Clone, Default)]
pub struct ScatteringAccumulator<T> {
    times: Vec<T>,
    values: Vec<T>,
    running: Vec<T>,
}

impl<T: Real> ScatteringAccumulator<T> {
    pub fn new() -> Self {
        Self { times: Vec::new(), values: Vec::new(), running: Vec::new() }
    }

    /// Append a sample; returns the accumulated integral.
    pub fn push(&mut self, t: T, u: &VecField<T>) -> T {
        let l4 = norm_l4l2(u);
        self.push_value(t, l4 * l4 * l4 * l4)
    }

    pub fn push_value(&mut self, t: T, l4pow4: T) -> T {
        let acc = match (self.times.last(), self.values.last(), self.running.last()) {
            (Some(&t0), Some(&v0), Some(&a0)) => a0 + (t - t0) * (v0 + l4pow4) / T::lit(2.0),
            _ => T::zero(),
        };
        self.times.push(t);
        self.values.push(l4pow4);
        self.running.push(acc);
        acc
    }

    pub fn total(&self) -> T {
        self.running.last().copied().unwrap_or(T::zero())
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn running(&self) -> &[T] {
        &self.running
    }

    /// Integral accumulated up to time `t`, linearly interpolated between samples.
    pub fn value_at(&self, t: T) -> T {
        match self.times.iter().position(|&s| s >= t) {
            None => self.total(),
            Some(0) => T::zero(),
            Some(k) => {
                let (t0, t1) = (self.times[k - 1], self.times[k]);
                let (a0, a1) = (self.running[k - 1], self.running[k]);
                let w = (t - t0) / (t1 - t0);
                a0 + w * (a1 - a0)
            }
        }
    }

    /// Share of the total accumulated during the final tenth of the sampled window.
    pub fn final_tenth_fraction(&self) -> T {
        let total = self.total();
        if total == T::zero() || self.times.len() < 2 {
            return T::zero();
        }
        let (t0, t1) = (self.times[0], *self.times.last().unwrap());
        let cut = t1 - (t1 - t0) / T::lit(10.0);
        (total - self.value_at(cut)) / total
    }
}

/// Least-squares slope of `log ‖u(t)‖_{L^4 l^2}` against `log t` over `[start, end]`.
pub fn dispersion_fit<T: Real>(samples: &[(T, T)], start: T, end: T) -> Result<T> {
    let pts: Vec<(T, T)> = samples
        .iter()
        .filter(|(t, v)| *t >= start && *t <= end && *t > T::zero() && *v > T::zero())
        .map(|&(t, v)| (t.ln(), v.ln()))
        .collect();
    if pts.len() < 2 || !(start < end) {
        return Err(Error::WindowOutOfRange {
            start: start.to_f64_lossy(),
            end: end.to_f64_lossy(),
            found: pts.len(),
        });
    }
    let n = T::of_usize(pts.len());
    let mx = pts.iter().map(|p| p.0).sum::<T>() / n;
    let my = pts.iter().map(|p| p.1).sum::<T>() / n;
    let sxy = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<T>();
    let sxx = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum::<T>();
    Ok(sxy / sxx)
}

/// One line of the diagnostics stream.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct DiagnosticsRecord<T> {
    pub t: T,
    /// Keys are `"a,b,c"`.
    pub mass_abc: BTreeMap<String, T>,
    pub l2h_0: T,
    pub l2h_1: T,
    pub l2h_2: T,
    pub energy: T,
    pub variance: T,
    pub virial_v1: T,
    pub morawetz_M: T,
    pub l4_accum: T,
    pub sup_norm: T,
    /// False when the mass has leaked out of the central half box.
    pub localized: bool,
}

/// Mass-family probes `(a, b, c)` recorded by default.
pub const DEFAULT_PROBES: [(f64, f64, f64); 3] = [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)];

/// Monitor that turns every sample into a [`DiagnosticsRecord`].
#[derive(Debug, Clone)]
pub struct DiagnosticsMonitor<T: Real> {
    pub probes: Vec<(T, T, T)>,
    pub center: [T; 2],
    kernel: Option<MorawetzKernel<T>>,
    accumulator: ScatteringAccumulator<T>,
    records: Vec<DiagnosticsRecord<T>>,
}

impl<T: Real> DiagnosticsMonitor<T> {
    pub fn new(grid: &Grid2D<T>, with_morawetz: bool) -> Self {
        let probes = DEFAULT_PROBES.iter().map(|&(a, b, c)| (T::lit(a), T::lit(b), T::lit(c))).collect();
        Self {
            probes,
            center: [T::zero(), T::zero()],
            kernel: with_morawetz.then(|| MorawetzKernel::mollified_radial(grid, None)),
            accumulator: ScatteringAccumulator::new(),
            records: Vec::new(),
        }
    }

    pub fn record(&mut self, t: T, u: &VecField<T>) -> &DiagnosticsRecord<T> {
        let l4_accum = self.accumulator.push(t, u);
        let mass_abc = self
            .probes
            .iter()
            .map(|&(a, b, c)| (format!("{a},{b},{c}"), mass_abc(u, a, b, c)))
            .collect();
        let chain = virial_chain(u, self.center);
        let morawetz = self.kernel.as_ref().map_or(T::zero(), |k| morawetz_action(u, k));
        self.records.push(DiagnosticsRecord {
            t,
            mass_abc,
            l2h_0: norm_l2h(u, 0),
            l2h_1: norm_l2h(u, 1),
            l2h_2: norm_l2h(u, 2),
            energy: chain.sixteen_e / T::lit(16.0),
            variance: chain.variance,
            virial_v1: chain.virial_v1,
            morawetz_M: morawetz,
            l4_accum,
            sup_norm: u.sup_norm(),
            localized: chain.localized,
        });
        self.records.last().unwrap()
    }

    pub fn records(&self) -> &[DiagnosticsRecord<T>] {
        &self.records
    }

    pub fn accumulator(&self) -> &ScatteringAccumulator<T> {
        &self.accumulator
    }

    pub fn into_records(self) -> Vec<DiagnosticsRecord<T>> {
        self.records
    }
}

impl<T: Real> Monitor<T> for DiagnosticsMonitor<T> {
    fn observe(&mut self, t: T, u: &VecField<T>) {
        self.record(t, u);
    }
}

/// Write records as newline-delimited JSON.
pub fn write_ndjson<T: Real + Serialize, W: Write>(records: &[DiagnosticsRecord<T>], mut out: W) -> Result<()> {
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| Error::Io(e.into()))?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taper_is_smooth_step() {
        let l = 10.0f64;
        assert_eq!(edge_taper(3.9, l).0, 1.0);
        assert_eq!(edge_taper(-5.0, l).0, 0.0);
        let (v, d) = edge_taper(4.5, l);
        assert!((v - 0.5).abs() < 1e-12 && d < 0.0);
        let h = 1e-6;
        for s in [4.2, 4.5, 4.8, -4.3] {
            let fd = (edge_taper(s + h, l).0 - edge_taper(s - h, l).0) / (2.0 * h);
            assert!((fd - edge_taper(s, l).1).abs() < 1e-6);
        }
    }

    #[test]
    fn zero_field_functionals_vanish() {
        let g = Grid2D::<f64>::new(8.0, 16).unwrap();
        let u = VecField::zeros(&g, vec![0, 1]).unwrap();
        let k = MorawetzKernel::mollified_radial(&g, None);
        assert_eq!(morawetz_action(&u, &k), 0.0);
        assert_eq!(morawetz_derivative(&u, &k).total, 0.0);
        let mut acc = ScatteringAccumulator::new();
        for t in 0..5 {
            assert_eq!(acc.push(t as f64, &u), 0.0);
        }
    }

    #[test]
    fn trapezoid_accumulation() {
        let mut acc = ScatteringAccumulator::<f64>::new();
        for i in 0..=10 {
            let t = i as f64 * 0.1;
            acc.push_value(t, 2.0 * t);
        }
        assert!((acc.total() - 1.0).abs() < 1e-14);
        assert!((acc.value_at(0.55) - 0.3025).abs() < 1e-2);
        assert!((acc.final_tenth_fraction() - 0.19).abs() < 1e-12);
    }

    #[test]
    fn dispersion_fit_recovers_power_law() {
        let samples: Vec<(f64, f64)> = (1..50).map(|i| (i as f64 * 0.2, (i as f64 * 0.2).powf(-0.5))).collect();
        assert!((dispersion_fit(&samples, 1.0, 9.0).unwrap() + 0.5).abs() < 1e-12);
        assert!(matches!(
            dispersion_fit(&samples, 20.0, 30.0),
            Err(Error::WindowOutOfRange { found: 0, .. })
        ));
    }
}
