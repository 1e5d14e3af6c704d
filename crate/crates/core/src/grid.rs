//! Periodic square box `[-L/2, L/2)^2` with its spectral machinery.
//!
//! Samples are stored row-major: index `i * M + j` holds the value at
//! `(x_i, y_j)` with `x_i = -L/2 + i dx`. The forward transform is the
//! unnormalized DFT; the inverse carries the `1/M^2` factor.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::real::{pairwise_sum, pairwise_sum_by, Real};

struct Plan<T: Real> {
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

#[derive(Clone)]
pub struct Grid2D<T: Real> {
    length: T,
    points: usize,
    spacing: T,
    wavenumbers: Vec<T>,
    plan: Arc<Plan<T>>,
}

impl<T: Real> fmt::Debug for Grid2D<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid2D")
            .field("length", &self.length)
            .field("points", &self.points)
            .field("spacing", &self.spacing)
            .finish()
    }
}

impl<T: Real> PartialEq for Grid2D<T> {
    fn eq(&self, other: &Self) -> bool {
        self.length == other.length && self.points == other.points
    }
}

impl<T: Real> Grid2D<T> {
    /// Box of side `length` with `points` samples per side (even, at least 4).
    pub fn new(length: T, points: usize) -> Result<Self> {
        if !(length > T::zero()) || !length.is_finite() {
            return Err(Error::InvalidGrid(format!("box length must be positive, got {length}")));
        }
        if points < 4 || !points.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "points per side must be even and at least 4, got {points}"
            )));
        }
        let spacing = length / T::of_usize(points);
        let base = T::TAU() / length;
        let half = points / 2;
        let wavenumbers = (0..points)
            .map(|n| {
                let signed = if n < half { n as f64 } else { n as f64 - points as f64 };
                base * T::lit(signed)
            })
            .collect();
        let mut planner = FftPlanner::new();
        let plan = Plan {
            forward: planner.plan_fft_forward(points),
            inverse: planner.plan_fft_inverse(points),
        };
        Ok(Self { length, points, spacing, wavenumbers, plan: Arc::new(plan) })
    }

    pub fn length(&self) -> T {
        self.length
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }

    /// Area element `dx^2` of the Riemann-sum quadrature.
    pub fn cell_area(&self) -> T {
        self.spacing * self.spacing
    }

    pub fn area(&self) -> T {
        self.length * self.length
    }

    /// Number of samples per component, `M^2`.
    pub fn len(&self) -> usize {
        self.points * self.points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Per-axis wavenumbers in DFT order: `(2π/L)·{0, 1, …, M/2-1, -M/2, …, -1}`.
    pub fn wavenumbers(&self) -> &[T] {
        &self.wavenumbers
    }

    pub fn coordinate(&self, i: usize) -> T {
        -self.length / T::lit(2.0) + T::of_usize(i) * self.spacing
    }

    pub fn coordinates(&self) -> Vec<T> {
        (0..self.points).map(|i| self.coordinate(i)).collect()
    }

    /// Physical position of flat sample index `idx`.
    pub fn position(&self, idx: usize) -> [T; 2] {
        [self.coordinate(idx / self.points), self.coordinate(idx % self.points)]
    }

    /// Wavevector of flat spectral index `idx`.
    pub fn wavevector(&self, idx: usize) -> [T; 2] {
        [self.wavenumbers[idx / self.points], self.wavenumbers[idx % self.points]]
    }

    pub fn k_squared(&self, idx: usize) -> T {
        let [kx, ky] = self.wavevector(idx);
        kx * kx + ky * ky
    }

    /// Signed lattice displacement of index offset `n` (used for correlation kernels).
    pub fn displacement(&self, n: usize) -> T {
        let half = self.points / 2;
        let signed = if n < half { n as f64 } else { n as f64 - self.points as f64 };
        T::lit(signed) * self.spacing
    }

    /// Riemann-sum quadrature `dx^2 Σ f`.
    pub fn integrate(&self, values: &[T]) -> T {
        pairwise_sum(values) * self.cell_area()
    }

    /// Riemann-sum quadrature of `f(idx)` over all samples.
    pub fn integrate_by<F: Fn(usize) -> T>(&self, f: F) -> T {
        pairwise_sum_by(self.len(), &f) * self.cell_area()
    }

    /// In-place unnormalized forward DFT of one component.
    pub fn fft_forward(&self, data: &mut [Complex<T>]) {
        self.transform(data, &self.plan.forward);
    }

    /// In-place inverse DFT including the `1/M^2` normalization.
    pub fn fft_inverse(&self, data: &mut [Complex<T>]) {
        self.transform(data, &self.plan.inverse);
        let norm = T::one() / T::of_usize(self.len());
        data.par_iter_mut().for_each(|z| *z = *z * norm);
    }

    fn transform(&self, data: &mut [Complex<T>], fft: &Arc<dyn Fft<T>>) {
        assert_eq!(data.len(), self.len(), "sample count must be M^2");
        let m = self.points;
        let rows = |buf: &mut [Complex<T>]| {
            let scratch_len = fft.get_inplace_scratch_len();
            buf.par_chunks_mut(m * ROW_BATCH.min(m)).for_each_init(
                || vec![Complex::new(T::zero(), T::zero()); scratch_len],
                |scratch, batch| fft.process_with_scratch(batch, scratch),
            );
        };
        rows(data);
        let mut transposed = vec![Complex::new(T::zero(), T::zero()); data.len()];
        transpose_into(data, &mut transposed, m);
        rows(&mut transposed);
        transpose_into(&transposed, data, m);
    }

    /// Multiply the spectrum of `data` by `symbol(idx)` and return to physical space.
    pub fn apply_multiplier<F>(&self, data: &mut [Complex<T>], symbol: F)
    where
        F: Fn(usize) -> Complex<T> + Sync,
    {
        self.fft_forward(data);
        data.par_iter_mut().enumerate().for_each(|(idx, z)| *z = *z * symbol(idx));
        self.fft_inverse(data);
    }

    /// Spectral partial derivative along `axis` (0 = x, 1 = y).
    pub fn derivative(&self, data: &[Complex<T>], axis: usize) -> Vec<Complex<T>> {
        let mut out = data.to_vec();
        self.apply_multiplier(&mut out, |idx| Complex::new(T::zero(), self.wavevector(idx)[axis]));
        out
    }

    /// Spectral gradient `(∂_x f, ∂_y f)`.
    pub fn gradient(&self, data: &[Complex<T>]) -> [Vec<Complex<T>>; 2] {
        let mut spec = data.to_vec();
        self.fft_forward(&mut spec);
        let mut gx = spec.clone();
        let mut gy = spec;
        for (idx, (a, b)) in gx.iter_mut().zip(gy.iter_mut()).enumerate() {
            let [kx, ky] = self.wavevector(idx);
            *a = *a * Complex::new(T::zero(), kx);
            *b = *b * Complex::new(T::zero(), ky);
        }
        self.fft_inverse(&mut gx);
        self.fft_inverse(&mut gy);
        [gx, gy]
    }

    pub fn laplacian(&self, data: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut out = data.to_vec();
        self.apply_multiplier(&mut out, |idx| Complex::new(-self.k_squared(idx), T::zero()));
        out
    }

    /// 2/3-rule filter: zero every mode with `|n_x|` or `|n_y|` above `M/3`.
    pub fn dealias(&self, data: &mut [Complex<T>]) {
        let cutoff = self.points / 3;
        let m = self.points;
        let keep = |n: usize| {
            let signed = if n < m / 2 { n } else { m - n };
            signed <= cutoff
        };
        self.apply_multiplier(data, |idx| {
            if keep(idx / m) && keep(idx % m) {
                Complex::new(T::one(), T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            }
        });
    }

    /// Grid with the same resolution on a box scaled by `factor`.
    pub fn rescaled(&self, factor: T) -> Result<Self> {
        Self::new(self.length * factor, self.points)
    }
}

/// Rows handed to one FFT call; rustfft processes consecutive chunks itself.
const ROW_BATCH: usize = 16;

fn transpose_into<T: Copy>(src: &[T], dst: &mut [T], m: usize) {
    const BLOCK: usize = 32;
    for ib in (0..m).step_by(BLOCK) {
        for jb in (0..m).step_by(BLOCK) {
            for i in ib..(ib + BLOCK).min(m) {
                for j in jb..(jb + BLOCK).min(m) {
                    dst[j * m + i] = src[i * m + j];
                }
            }
        }
    }
}

/// Forward transform of a single component, checking the sample count.
pub fn forward_transform<T: Real>(grid: &Grid2D<T>, field: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
    check_len(grid, field.len())?;
    let mut out = field.to_vec();
    grid.fft_forward(&mut out);
    Ok(out)
}

pub fn inverse_transform<T: Real>(
    grid: &Grid2D<T>,
    spectrum: &[Complex<T>],
) -> Result<Vec<Complex<T>>> {
    check_len(grid, spectrum.len())?;
    let mut out = spectrum.to_vec();
    grid.fft_inverse(&mut out);
    Ok(out)
}

/// `dx^2 Σ|f|^2` computed from the unnormalized spectrum (Parseval).
pub fn spectral_energy<T: Real>(grid: &Grid2D<T>, spectrum: &[Complex<T>]) -> T {
    let n = T::of_usize(grid.len());
    pairwise_sum_by(spectrum.len(), &|i| spectrum[i].norm_sqr()) * grid.cell_area() / n
}

fn check_len<T: Real>(grid: &Grid2D<T>, found: usize) -> Result<()> {
    if found != grid.len() {
        return Err(Error::DimensionMismatch { expected: grid.len(), found });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn rejects_bad_parameters() {
        assert!(Grid2D::<f64>::new(1.0, 7).is_err());
        assert!(Grid2D::<f64>::new(1.0, 2).is_err());
        assert!(Grid2D::<f64>::new(0.0, 8).is_err());
        assert!(Grid2D::<f64>::new(-3.0, 8).is_err());
    }

    #[test]
    fn two_pi_box_has_integer_wavenumbers() {
        let g = Grid2D::new(2.0 * PI, 4).unwrap();
        assert!((g.spacing() - PI / 2.0).abs() < 1e-15);
        let k = g.wavenumbers();
        let expected = [0.0, 1.0, -2.0, -1.0];
        for (a, b) in k.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
        assert_eq!(k.iter().filter(|&&v| v == 0.0).count(), 1);
    }

    #[test]
    fn spacing_and_constant_quadrature() {
        let g = Grid2D::new(32.0, 256).unwrap();
        assert_eq!(g.spacing(), 0.125);
        assert_eq!(g.spacing() * 256.0, 32.0);
        let g = Grid2D::<f64>::new(10.0, 64).unwrap();
        let ones = vec![1.0; g.len()];
        assert!((g.integrate(&ones) - 100.0).abs() < 1e-12);
    }

    #[test]
    fn constant_transforms_to_zero_mode() {
        let g = Grid2D::<f64>::new(3.0, 8).unwrap();
        let spec = forward_transform(&g, &vec![Complex::new(1.0, 0.0); g.len()]).unwrap();
        assert!((spec[0].re - 64.0).abs() < 1e-12);
        assert!(spec[1..].iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn pure_mode_has_single_coefficient() {
        let g = Grid2D::new(5.0, 16).unwrap();
        let (kx, ky) = (g.wavenumbers()[3], g.wavenumbers()[14]);
        let field: Vec<_> = (0..g.len())
            .map(|idx| {
                let [x, y] = g.position(idx);
                Complex::new(0.0, kx * x + ky * y).exp()
            })
            .collect();
        let spec = forward_transform(&g, &field).unwrap();
        let nonzero: Vec<_> = (0..g.len()).filter(|&i| spec[i].norm() > 1e-9).collect();
        assert_eq!(nonzero, vec![3 * 16 + 14]);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let g = Grid2D::new(1.0, 8).unwrap();
        let err = forward_transform(&g, &[Complex::new(0.0, 0.0); 10]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 64, found: 10 }));
        assert!(inverse_transform(&g, &[]).is_err());
    }

    #[test]
    fn derivative_of_mode_is_exact() {
        let g = Grid2D::new(2.0 * PI, 16).unwrap();
        let f: Vec<_> = (0..g.len())
            .map(|idx| {
                let [x, y] = g.position(idx);
                Complex::new((2.0 * x).sin() * (3.0 * y).cos(), 0.0)
            })
            .collect();
        let [gx, gy] = g.gradient(&f);
        for idx in 0..g.len() {
            let [x, y] = g.position(idx);
            assert!((gx[idx].re - 2.0 * (2.0 * x).cos() * (3.0 * y).cos()).abs() < 1e-12);
            assert!((gy[idx].re + 3.0 * (2.0 * x).sin() * (3.0 * y).sin()).abs() < 1e-12);
        }
        let lap = g.laplacian(&f);
        for idx in 0..g.len() {
            assert!((lap[idx] + f[idx] * 13.0).norm() < 1e-11);
        }
    }

    #[test]
    fn single_precision_round_trip() {
        let g = Grid2D::<f32>::new(4.0, 32).unwrap();
        let f: Vec<_> = (0..g.len())
            .map(|idx| {
                let [x, y] = g.position(idx);
                Complex::new((-x * x - y * y).exp(), 0.5 * x)
            })
            .collect();
        let back = inverse_transform(&g, &forward_transform(&g, &f).unwrap()).unwrap();
        let err = f.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0f32, f32::max);
        assert!(err < 1e-5);
    }
}
