//! The state vector `u = {u_j}`: `N` complex components on one shared grid.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::Grid2D;
use crate::real::Real;

/// `N` complex components, component-major and row-major per component.
///
/// Each component carries an integer label `j`; labels enter the `h^s`
/// weights `⟨j⟩^{2s}` and the `M_{a,b,c}` mass family.
#[derive(Debug, Clone, PartialEq)]
pub struct VecField<T: Real> {
    grid: Grid2D<T>,
    labels: Vec<i64>,
    data: Vec<Complex<T>>,
}

/// Labels `0..n` of a finite `n`-component system.
pub fn finite_labels(n: usize) -> Vec<i64> {
    (0..n as i64).collect()
}

/// Labels `-J..=J` of a symmetric truncation of the infinite system.
pub fn symmetric_labels(half_width: usize) -> Vec<i64> {
    let j = half_width as i64;
    (-j..=j).collect()
}

fn check_labels(labels: &[i64]) -> Result<()> {
    if labels.is_empty() {
        return Err(Error::InvalidLabels("at least one component is required".into()));
    }
    let mut sorted = labels.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidLabels(format!("duplicate labels in {labels:?}")));
    }
    Ok(())
}

impl<T: Real> VecField<T> {
    pub fn zeros(grid: &Grid2D<T>, labels: Vec<i64>) -> Result<Self> {
        check_labels(&labels)?;
        let data = vec![Complex::new(T::zero(), T::zero()); labels.len() * grid.len()];
        Ok(Self { grid: grid.clone(), labels, data })
    }

    /// Sample `f(component, x, y)` on the grid.
    pub fn from_fn<F>(grid: &Grid2D<T>, labels: Vec<i64>, f: F) -> Result<Self>
    where
        F: Fn(usize, T, T) -> Complex<T>,
    {
        let mut field = Self::zeros(grid, labels)?;
        let len = grid.len();
        for (c, chunk) in field.data.chunks_mut(len).enumerate() {
            for (idx, z) in chunk.iter_mut().enumerate() {
                let [x, y] = grid.position(idx);
                *z = f(c, x, y);
            }
        }
        Ok(field)
    }

    pub fn from_components(
        grid: &Grid2D<T>,
        labels: Vec<i64>,
        components: Vec<Vec<Complex<T>>>,
    ) -> Result<Self> {
        check_labels(&labels)?;
        if components.len() != labels.len() {
            return Err(Error::InvalidLabels(format!(
                "{} labels for {} components",
                labels.len(),
                components.len()
            )));
        }
        let mut data = Vec::with_capacity(labels.len() * grid.len());
        for comp in components {
            if comp.len() != grid.len() {
                return Err(Error::DimensionMismatch { expected: grid.len(), found: comp.len() });
            }
            data.extend(comp);
        }
        Ok(Self { grid: grid.clone(), labels, data })
    }

    /// Real single-component field with label 0.
    pub fn scalar(grid: &Grid2D<T>, values: &[T]) -> Result<Self> {
        let comp = values.iter().map(|&v| Complex::new(v, T::zero())).collect();
        Self::from_components(grid, vec![0], vec![comp])
    }

    pub fn grid(&self) -> &Grid2D<T> {
        &self.grid
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn n_components(&self) -> usize {
        self.labels.len()
    }

    pub fn component(&self, c: usize) -> &[Complex<T>] {
        let len = self.grid.len();
        &self.data[c * len..(c + 1) * len]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [Complex<T>] {
        let len = self.grid.len();
        &mut self.data[c * len..(c + 1) * len]
    }

    pub fn components(&self) -> std::slice::ChunksExact<'_, Complex<T>> {
        self.data.chunks_exact(self.grid.len())
    }

    pub fn components_mut(&mut self) -> std::slice::ChunksExactMut<'_, Complex<T>> {
        let len = self.grid.len();
        self.data.chunks_exact_mut(len)
    }

    /// Flat sample storage, component-major.
    pub fn data(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    /// Same samples reinterpreted on another grid with the same resolution.
    pub fn with_grid(mut self, grid: &Grid2D<T>) -> Result<Self> {
        if grid.points() != self.grid.points() {
            return Err(Error::DimensionMismatch { expected: self.grid.len(), found: grid.len() });
        }
        self.grid = grid.clone();
        Ok(self)
    }

    pub fn scaled(&self, factor: Complex<T>) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|z| *z = *z * factor);
        out
    }

    pub fn scaled_real(&self, factor: T) -> Self {
        self.scaled(Complex::new(factor, T::zero()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// `max_x (Σ_j |u_j(x)|^2)^{1/2}`.
    pub fn sup_norm(&self) -> T {
        self.density().into_iter().fold(T::zero(), T::max).sqrt()
    }

    /// Pointwise `Σ_j |u_j|^2`.
    pub fn density(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.grid.len()];
        for comp in self.components() {
            for (d, z) in out.iter_mut().zip(comp) {
                *d = *d + z.norm_sqr();
            }
        }
        out
    }

    /// Largest pointwise difference between two fields on the same layout.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }
}
