//! Strang split-step time integration of `i∂_t u + Δu = -F(u)`.
//!
//! Both substeps are solved exactly: the free flow is a phase multiplier in
//! Fourier space, and along the nonlinear flow each `|u_j|` is pointwise
//! constant, so `u_j` only rotates by `exp(i dt (2Σ_k|u_k|^2 - |u_j|^2))`.

use std::collections::VecDeque;

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::VecField;
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T> {
    pub dt_max: T,
    /// Step bound `dt ≤ cfl_constant / max_x(2Σ_k|u_k|^2)`.
    pub cfl_constant: T,
    pub t_end: T,
    /// Absolute sup-norm that flags blowup; `None` means `1000 ×` the initial sup norm.
    pub blowup_sup_threshold: Option<T>,
    pub dt_min: T,
    pub dealias: bool,
    pub sample_interval: T,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            dt_max: T::lit(1e-2),
            cfl_constant: T::lit(0.1),
            t_end: T::one(),
            blowup_sup_threshold: None,
            dt_min: T::lit(1e-9),
            dealias: false,
            sample_interval: T::lit(0.1),
        }
    }
}

/// Default blowup factor relative to the initial sup norm.
pub const DEFAULT_BLOWUP_FACTOR: f64 = 1e3;

impl<T: Real> SolverConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: T| v > T::zero() && !v.is_nan();
        if !positive(self.dt_max) || !positive(self.dt_min) || !positive(self.cfl_constant) {
            return Err(Error::InvalidConfig("dt_max, dt_min and cfl_constant must be positive".into()));
        }
        if !(self.dt_min < self.dt_max) {
            return Err(Error::InvalidConfig(format!(
                "dt_min ({}) must be below dt_max ({})",
                self.dt_min, self.dt_max
            )));
        }
        if !positive(self.t_end) || !positive(self.sample_interval) {
            return Err(Error::InvalidConfig("t_end and sample_interval must be positive".into()));
        }
        if let Some(th) = self.blowup_sup_threshold {
            if !positive(th) {
                return Err(Error::InvalidConfig("blowup threshold must be positive".into()));
            }
        }
        Ok(())
    }

    /// Fixed-step configuration: every step equals `dt` and every step is sampled.
    pub fn fixed_step(dt: T, t_end: T) -> Self {
        Self {
            dt_max: dt,
            cfl_constant: T::infinity(),
            t_end,
            blowup_sup_threshold: None,
            dt_min: dt * T::lit(1e-6),
            dealias: false,
            sample_interval: dt,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolutionStatus {
    Completed,
    BlowupDetected,
    Aborted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BlowupReason {
    SupThreshold,
    StepCollapse,
}

#[derive(Debug, Clone)]
pub struct BlowupInfo<T> {
    pub time: T,
    pub reason: BlowupReason,
    /// Most recent `(t, sup_norm)` pairs, oldest first.
    pub sup_history: Vec<(T, T)>,
}

#[derive(Debug, Clone)]
pub struct EvolutionOutcome<T: Real> {
    pub status: EvolutionStatus,
    pub t_final: T,
    pub steps: usize,
    pub final_state: VecField<T>,
    pub blowup: Option<BlowupInfo<T>>,
}

/// Receives immutable snapshots at every sample time.
pub trait Monitor<T: Real> {
    fn observe(&mut self, t: T, u: &VecField<T>);
}

impl<T: Real, F: FnMut(T, &VecField<T>)> Monitor<T> for F {
    fn observe(&mut self, t: T, u: &VecField<T>) {
        self(t, u)
    }
}

/// Precomputed free-flow multiplier `e^{-i|k|^2 τ}` for a fixed `τ`.
#[derive(Debug, Clone)]
pub struct LinearPropagator<T: Real> {
    tau: T,
    phases: Vec<Complex<T>>,
}

impl<T: Real> LinearPropagator<T> {
    pub fn new(grid: &crate::grid::Grid2D<T>, tau: T) -> Self {
        let phases = (0..grid.len())
            .map(|idx| Complex::from_polar(T::one(), -grid.k_squared(idx) * tau))
            .collect();
        Self { tau, phases }
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn apply(&self, u: &mut VecField<T>) {
        let grid = u.grid().clone();
        for comp in u.components_mut() {
            grid.apply_multiplier(comp, |idx| self.phases[idx]);
        }
    }
}

/// Free Schrödinger flow `e^{iτΔ}` applied to every component.
pub fn linear_step<T: Real>(u: &VecField<T>, tau: T) -> VecField<T> {
    let mut out = u.clone();
    LinearPropagator::new(u.grid(), tau).apply(&mut out);
    out
}

/// Half step `e^{i(dt/2)Δ}` of the splitting.
pub fn linear_half_step<T: Real>(u: &VecField<T>, dt: T) -> VecField<T> {
    linear_step(u, dt / T::lit(2.0))
}

/// Exact nonlinear substep `u_j ← exp(i dt (2Σ_k|u_k|^2 - |u_j|^2)) u_j`.
pub fn nonlinear_step<T: Real>(u: &VecField<T>, dt: T) -> VecField<T> {
    let mut out = u.clone();
    nonlinear_in_place(&mut out, dt);
    out
}

fn nonlinear_in_place<T: Real>(u: &mut VecField<T>, dt: T) {
    let rho = u.density();
    let two = T::lit(2.0);
    for comp in u.components_mut() {
        for (z, &r) in comp.iter_mut().zip(&rho) {
            let phase = dt * (two * r - z.norm_sqr());
            *z = *z * Complex::from_polar(T::one(), phase);
        }
    }
}

/// Second-order Strang step: half linear, full nonlinear, half linear.
pub fn strang_step<T: Real>(u: &VecField<T>, dt: T) -> VecField<T> {
    let half = LinearPropagator::new(u.grid(), dt / T::lit(2.0));
    let mut out = u.clone();
    strang_in_place(&mut out, &half);
    out
}

fn strang_in_place<T: Real>(u: &mut VecField<T>, half: &LinearPropagator<T>) {
    half.apply(u);
    nonlinear_in_place(u, half.tau * T::lit(2.0));
    half.apply(u);
}

fn dealiased<T: Real>(mut u: VecField<T>) -> VecField<T> {
    let grid = u.grid().clone();
    for comp in u.components_mut() {
        grid.dealias(comp);
    }
    u
}

const SUP_HISTORY: usize = 64;

/// Adaptive Strang integration from `u0` up to `cfg.t_end`.
///
/// Monitors see `t = 0` and every multiple of `sample_interval`; steps are
/// shortened to land on those times exactly.
pub fn evolve<T: Real>(
    u0: &VecField<T>,
    cfg: &SolverConfig<T>,
    monitors: &mut [&mut dyn Monitor<T>],
) -> Result<EvolutionOutcome<T>> {
    cfg.validate()?;
    if !u0.is_finite() {
        return Err(Error::NonFinite);
    }
    let threshold = cfg
        .blowup_sup_threshold
        .unwrap_or_else(|| u0.sup_norm() * T::lit(DEFAULT_BLOWUP_FACTOR));
    let mut u = u0.clone();
    let mut t = T::zero();
    let mut steps = 0usize;
    let mut sample_index = 1usize;
    let mut history: VecDeque<(T, T)> = VecDeque::with_capacity(SUP_HISTORY);
    history.push_back((t, u.sup_norm()));
    for m in monitors.iter_mut() {
        m.observe(t, &u);
    }
    let landing = T::lit(1e-12) * cfg.sample_interval.max(T::one());
    let two = T::lit(2.0);
    let mut propagator: Option<LinearPropagator<T>> = None;

    let finish = |status, t, steps, u: VecField<T>, blowup| EvolutionOutcome {
        status,
        t_final: t,
        steps,
        final_state: u,
        blowup,
    };

    while t < cfg.t_end - landing {
        let rate = u.density().into_iter().fold(T::zero(), T::max) * two;
        let mut dt = cfg.dt_max.min(cfg.cfl_constant / rate);
        if dt < cfg.dt_min {
            let info = BlowupInfo {
                time: t,
                reason: BlowupReason::StepCollapse,
                sup_history: history.into_iter().collect(),
            };
            return Ok(finish(EvolutionStatus::BlowupDetected, t, steps, u, Some(info)));
        }
        let next_sample = T::of_usize(sample_index) * cfg.sample_interval;
        let target = next_sample.min(cfg.t_end);
        let mut hit_target = false;
        if t + dt >= target - landing {
            dt = target - t;
            hit_target = true;
        }
        if propagator.as_ref().is_none_or(|p| p.tau() != dt / two) {
            propagator = Some(LinearPropagator::new(u.grid(), dt / two));
        }
        let mut next = u.clone();
        strang_in_place(&mut next, propagator.as_ref().unwrap());
        if cfg.dealias {
            next = dealiased(next);
        }
        if !next.is_finite() {
            return Ok(finish(EvolutionStatus::Aborted, t, steps, u, None));
        }
        u = next;
        t = if hit_target { target } else { t + dt };
        steps += 1;
        let sup = u.sup_norm();
        if history.len() == SUP_HISTORY {
            history.pop_front();
        }
        history.push_back((t, sup));
        // t_end may sit a rounding error below the k-th multiple of the interval
        let sampled = hit_target && (next_sample - target).abs() <= landing;
        if sampled {
            sample_index += 1;
        }
        if sampled || sup > threshold {
            for m in monitors.iter_mut() {
                m.observe(t, &u);
            }
        }
        if sup > threshold {
            let info = BlowupInfo {
                time: t,
                reason: BlowupReason::SupThreshold,
                sup_history: history.into_iter().collect(),
            };
            return Ok(finish(EvolutionStatus::BlowupDetected, t, steps, u, Some(info)));
        }
    }
    Ok(finish(EvolutionStatus::Completed, t, steps, u, None))
}

/// Galilean transform `u_j(x) ← e^{i x·ξ - i t|ξ|^2} u_j(x - 2tξ)`.
///
/// `ξ` must be a lattice wavevector so the modulation stays periodic; the
/// translation is applied spectrally.
pub fn galilean_boost<T: Real>(u: &VecField<T>, xi: [T; 2], t: T) -> Result<VecField<T>> {
    let grid = u.grid().clone();
    let base = T::TAU() / grid.length();
    for &c in &xi {
        let n = c / base;
        if (n - n.round()).abs() > T::lit(1e-9) {
            return Err(Error::NotGridCommensurate(xi[0].to_f64_lossy(), xi[1].to_f64_lossy()));
        }
    }
    let shift = [T::lit(2.0) * t * xi[0], T::lit(2.0) * t * xi[1]];
    let xi2 = xi[0] * xi[0] + xi[1] * xi[1];
    let mut out = u.clone();
    for comp in out.components_mut() {
        grid.apply_multiplier(comp, |idx| {
            let [kx, ky] = grid.wavevector(idx);
            Complex::from_polar(T::one(), -(kx * shift[0] + ky * shift[1]))
        });
        for (idx, z) in comp.iter_mut().enumerate() {
            let [x, y] = grid.position(idx);
            *z = *z * Complex::from_polar(T::one(), x * xi[0] + y * xi[1] - t * xi2);
        }
    }
    Ok(out)
}


/// `u_j ← λ u_j(λx)`, realized by relabeling the box `L ← L/λ`.
pub fn rescale<T: Real>(u: &VecField<T>, lambda: T) -> Result<VecField<T>> {
    if !(lambda > T::zero()) || !lambda.is_finite() {
        return Err(Error::InvalidConfig(format!("scaling factor must be positive, got {lambda}")));
    }
    if lambda == T::one() {
        return Ok(u.clone());
    }
    let grid = u.grid().rescaled(T::one() / lambda)?;
    u.scaled_real(lambda).with_grid(&grid)
}
