//! The experiments behind each subcommand. Every function returns a
//! structured report; writing files is left to [`crate::output`] except for
//! simulation snapshots, which are streamed while the run progresses.

use std::sync::OnceLock;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use rnls_core::diagnostics::{morawetz_action, morawetz_derivative, virial_chain, DiagnosticsMonitor};
use rnls_core::groundstate::{
    build_vector_ground_state_with_labels, solve_townes_petviashvili, solve_townes_shooting, GroundStateSummary,
};
use rnls_core::nonlinearity::{apply_nonlinearity, apply_nonlinearity_bruteforce, resonance_set};
use rnls_core::norms::{central_mass_fraction, mass};
use rnls_core::snapshot::load_snapshot;
use rnls_core::solver::{evolve, BlowupReason, EvolutionStatus, Monitor};
use rnls_core::variational::{energy, sharp_constants, weinstein, SystemSize};
use rnls_core::{finite_labels, DiagnosticsRecord, Field, GroundState, Grid, MorawetzKernel, SolverConfig};

use crate::config::{
    DichotomyRun, ExperimentConfig, GroundStateMethodChoice, InitialFamily, DEFAULT_MASS_SCALE,
};
use crate::error::{CliError, Result};
use crate::output::{OutputDir, SnapshotWriter};

/// Reference Townes profile from radial shooting (`r_max = 20`, `dr = 1e-3`);
/// its mass sets every threshold reported by the tool.
pub fn townes_reference() -> &'static GroundState {
    static Q: OnceLock<GroundState> = OnceLock::new();
    Q.get_or_init(|| solve_townes_shooting(20.0, 1e-3).expect("reference shooting run"))
}

pub fn q_mass2() -> f64 {
    townes_reference().mass2
}

/// `‖u‖^2` threshold for a system of `n` components.
pub fn threshold_mass2(n: usize) -> f64 {
    sharp_constants(SystemSize::Finite(n), q_mass2()).threshold_mass2()
}

/// Sup norm beyond which a collapsing profile `λQ(λx)` has a core narrower
/// than `cells` grid spacings, floored at `factor ×` the initial sup norm.
pub fn resolution_blowup_threshold(grid: &Grid, initial_sup: f64, cells: f64, factor: f64) -> f64 {
    (townes_reference().peak / (cells * grid.spacing())).max(factor * initial_sup)
}

// ---------------------------------------------------------------- initial data

#[derive(Debug, Clone)]
pub struct InitialData {
    pub field: Field,
    /// `‖u_0‖^2 / threshold^2`.
    pub sigma: f64,
    pub threshold_mass2: f64,
}

fn gaussian(grid: &Grid, labels: Vec<i64>, amplitude: f64) -> Result<Field> {
    Ok(Field::from_fn(grid, labels, |_, x, y| {
        Complex::new(amplitude * (-(x * x + y * y) / 2.0).exp(), 0.0)
    })?)
}

/// Seeded sum of three modulated Gaussian bumps per component, centred within
/// `1.5` of the origin.
pub fn random_bumps(grid: &Grid, labels: Vec<i64>, seed: u64) -> Result<Field> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bumps: Vec<Vec<[f64; 6]>> = (0..labels.len())
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
    Ok(Field::from_fn(grid, labels, |c, x, y| {
        bumps[c]
            .iter()
            .map(|&[cx, cy, w, kx, ky, ph]| {
                let r2 = (x - cx).powi(2) + (y - cy).powi(2);
                Complex::from_polar((-r2 / (2.0 * w * w)).exp(), kx * x + ky * y + ph)
            })
            .sum()
    })?)
}

fn scale_to_sigma(field: Field, sigma: f64, threshold_mass2: f64) -> Result<Field> {
    let m = mass(&field);
    if m == 0.0 {
        return Err(rnls_core::Error::ZeroField.into());
    }
    Ok(field.scaled_real((sigma * threshold_mass2 / m).sqrt()))
}

/// Build the initial datum described by `cfg.initial` on `grid`.
pub fn initial_data(cfg: &ExperimentConfig, grid: &Grid) -> Result<InitialData> {
    let init = &cfg.initial;
    let labels = cfg.system.labels();
    if init.family == InitialFamily::Snapshot {
        let path = init.snapshot.as_ref().expect("validated");
        let field = load_snapshot::<f64>(path)?.field;
        let thr = threshold_mass2(field.n_components());
        let field = match init.mass_scale {
            Some(s) => scale_to_sigma(field, s, thr)?,
            None => field,
        };
        return Ok(InitialData { sigma: mass(&field) / thr, field, threshold_mass2: thr });
    }
    let thr = threshold_mass2(labels.len());
    let field = match (init.family, init.amplitude2) {
        (InitialFamily::Gaussian, Some(a2)) => gaussian(grid, labels, a2.sqrt())?,
        (_, Some(_)) => {
            return Err(CliError::Config("initial.amplitude2 applies to the gaussian family only".into()))
        }
        (family, None) => {
            let sigma = init.mass_scale.unwrap_or(DEFAULT_MASS_SCALE);
            let raw = match family {
                InitialFamily::Gaussian => gaussian(grid, labels, 1.0)?,
                InitialFamily::RandomBumps => random_bumps(grid, labels, cfg.seed)?,
                InitialFamily::GroundState => {
                    let q = solve_townes_petviashvili(
                        grid,
                        cfg.ground_state.tolerance,
                        cfg.ground_state.max_iter,
                    )?;
                    build_vector_ground_state_with_labels(&q, labels)?.components
                }
                InitialFamily::Snapshot => unreachable!(),
            };
            scale_to_sigma(raw, sigma, thr)?
        }
    };
    Ok(InitialData { sigma: mass(&field) / thr, field, threshold_mass2: thr })
}

// ---------------------------------------------------------------- ground state

#[derive(Debug, Clone, Serialize)]
pub struct GroundStateReport {
    pub length: f64,
    pub points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub petviashvili: Option<GroundStateSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shooting: Option<GroundStateSummary>,
    /// `|m_P - m_S| / m_S` when both methods ran.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relative_mass_gap: Option<f64>,
    #[serde(skip)]
    pub profile: Option<Field>,
}

pub fn run_ground_state(cfg: &ExperimentConfig) -> Result<GroundStateReport> {
    let gs = &cfg.ground_state;
    let method = gs.method;
    let spectral = if method != GroundStateMethodChoice::Shooting {
        let grid = Grid::new(cfg.grid.length, cfg.grid.points)?;
        Some(solve_townes_petviashvili(&grid, gs.tolerance, gs.max_iter)?)
    } else {
        None
    };
    let radial = if method != GroundStateMethodChoice::Petviashvili {
        Some(solve_townes_shooting(gs.r_max, gs.dr)?)
    } else {
        None
    };
    let relative_mass_gap = match (&spectral, &radial) {
        (Some(p), Some(s)) => Some((p.mass2 - s.mass2).abs() / s.mass2),
        _ => None,
    };
    Ok(GroundStateReport {
        length: cfg.grid.length,
        points: cfg.grid.points,
        petviashvili: spectral.as_ref().map(GroundState::summary),
        shooting: radial.as_ref().map(GroundState::summary),
        relative_mass_gap,
        profile: spectral.and_then(|q| q.grid_profile().cloned()),
    })
}

// ---------------------------------------------------------------- constants

#[derive(Debug, Clone, Serialize)]
pub struct GnRow {
    /// Number of components, or `inf`.
    pub n: String,
    pub predicted_constant: f64,
    pub measured_weinstein: Option<f64>,
    pub relative_error: Option<f64>,
    pub threshold_mass2: f64,
    /// `C_N · threshold^2 - 2`.
    pub product_residual: f64,
    /// `C_∞ - C_N - C_∞/(2N)`; zero by construction for the `inf` row.
    pub gap_residual: f64,
    /// Largest Euler-Lagrange residual of the vector ground state.
    pub max_el_residual: Option<f64>,
}

/// Constants table together with the grid ground-state mass it was built from.
#[derive(Debug, Clone, Serialize)]
pub struct GnTable {
    pub q_mass2: f64,
    pub rows: Vec<GnRow>,
}

pub fn run_gn_constants(cfg: &ExperimentConfig) -> Result<GnTable> {
    let grid = Grid::new(cfg.grid.length, cfg.grid.points)?;
    let q = solve_townes_petviashvili(&grid, cfg.ground_state.tolerance, cfg.ground_state.max_iter)?;
    let inf = sharp_constants(SystemSize::Infinite, q.mass2);
    let mut rows = Vec::new();
    for &n in &cfg.gn.n_list {
        let c = sharp_constants(SystemSize::Finite(n), q.mass2);
        let v = build_vector_ground_state_with_labels(&q, finite_labels(n))?;
        let w = weinstein(&v.components)?;
        rows.push(GnRow {
            n: n.to_string(),
            predicted_constant: c.constant,
            measured_weinstein: Some(w),
            relative_error: Some((w - c.constant).abs() / c.constant),
            threshold_mass2: c.threshold_mass2(),
            product_residual: c.constant * c.threshold_mass2() - 2.0,
            gap_residual: inf.constant - c.constant - inf.constant / (2.0 * n as f64),
            max_el_residual: v.el_residuals.iter().copied().reduce(f64::max),
        });
    }
    rows.push(GnRow {
        n: "inf".into(),
        predicted_constant: inf.constant,
        measured_weinstein: None,
        relative_error: None,
        threshold_mass2: inf.threshold_mass2(),
        product_residual: inf.constant * inf.threshold_mass2() - 2.0,
        gap_residual: 0.0,
        max_el_residual: None,
    });
    Ok(GnTable { q_mass2: q.mass2, rows })
}

// ---------------------------------------------------------------- simulation

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    BlowupDetected,
    Aborted,
}

impl From<EvolutionStatus> for RunStatus {
    fn from(s: EvolutionStatus) -> Self {
        match s {
            EvolutionStatus::Completed => Self::Completed,
            EvolutionStatus::BlowupDetected => Self::BlowupDetected,
            EvolutionStatus::Aborted => Self::Aborted,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulationSummary {
    pub n: usize,
    pub length: f64,
    pub points: usize,
    pub sigma: f64,
    pub mass2: f64,
    pub threshold_mass2: f64,
    pub energy: f64,
    pub initial_sup: f64,
    /// `None` means the solver default of `1000 ×` the initial sup norm.
    pub blowup_sup_threshold: Option<f64>,
    pub status: RunStatus,
    pub t_final: f64,
    pub steps: usize,
    pub blowup_time: Option<f64>,
    pub blowup_reason: Option<String>,
    pub samples: usize,
    pub snapshots: usize,
}

#[derive(Debug, Clone)]
pub struct SimulationReport {
    pub summary: SimulationSummary,
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: Field,
}

fn solver_config(cfg: &ExperimentConfig, threshold: Option<f64>) -> SolverConfig {
    let s = &cfg.solver;
    SolverConfig {
        dt_max: s.dt_max,
        cfl_constant: s.cfl_constant,
        t_end: s.t_end,
        blowup_sup_threshold: threshold,
        dt_min: s.dt_min,
        dealias: s.dealias,
        sample_interval: s.sample_interval,
    }
}

fn reason_name(r: BlowupReason) -> String {
    match r {
        BlowupReason::SupThreshold => "sup_threshold".into(),
        BlowupReason::StepCollapse => "step_collapse".into(),
    }
}

/// Evolve the configured initial datum with full diagnostics; snapshots are
/// written into `out` while the run progresses.
pub fn run_simulation(cfg: &ExperimentConfig, out: Option<&OutputDir>) -> Result<SimulationReport> {
    let grid = Grid::new(cfg.grid.length, cfg.grid.points)?;
    let init = initial_data(cfg, &grid)?;
    let u0 = init.field;
    let grid = u0.grid().clone();
    let initial_sup = u0.sup_norm();
    let threshold = match (cfg.solver.blowup_sup_threshold, cfg.solver.resolution_limited_blowup) {
        (Some(t), _) => Some(t),
        (None, true) => Some(resolution_blowup_threshold(
            &grid,
            initial_sup,
            cfg.dichotomy.resolution_cells,
            cfg.dichotomy.min_blowup_factor,
        )),
        (None, false) => None,
    };
    let solver = solver_config(cfg, threshold);
    let mut diagnostics = DiagnosticsMonitor::new(&grid, cfg.solver.morawetz);
    let mut writer = out
        .filter(|_| cfg.output.snapshots)
        .map(|dir| SnapshotWriter::new(dir, cfg.output.snapshot_every));
    let outcome = {
        let mut monitors: Vec<&mut dyn Monitor<f64>> = vec![&mut diagnostics];
        if let Some(w) = writer.as_mut() {
            monitors.push(w);
        }
        evolve(&u0, &solver, &mut monitors)?
    };
    let snapshots = match writer {
        Some(mut w) => {
            w.write_final(outcome.t_final, &outcome.final_state)?;
            w.finish()?
        }
        None => 0,
    };
    let records = diagnostics.into_records();
    let summary = SimulationSummary {
        n: u0.n_components(),
        length: grid.length(),
        points: grid.points(),
        sigma: init.sigma,
        mass2: mass(&u0),
        threshold_mass2: init.threshold_mass2,
        energy: energy(&u0),
        initial_sup,
        blowup_sup_threshold: threshold,
        status: outcome.status.into(),
        t_final: outcome.t_final,
        steps: outcome.steps,
        blowup_time: outcome.blowup.as_ref().map(|b| b.time),
        blowup_reason: outcome.blowup.as_ref().map(|b| reason_name(b.reason)),
        samples: records.len(),
        snapshots,
    };
    Ok(SimulationReport { summary, records, final_state: outcome.final_state })
}

// ---------------------------------------------------------------- dichotomy

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Disperses,
    Blowup,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictRow {
    pub n: usize,
    pub sigma: f64,
    pub mass2: f64,
    pub threshold_mass2: f64,
    pub energy: f64,
    pub length: f64,
    pub points: usize,
    pub t_end: f64,
    pub verdict: Verdict,
    pub t_final: f64,
    pub steps: usize,
    pub tail_fraction: Option<f64>,
    pub sup_decay: Option<f64>,
    pub outer_mass_fraction: Option<f64>,
    pub blowup_time: Option<f64>,
    pub blowup_reason: Option<String>,
    pub blowup_sup_threshold: Option<f64>,
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct DichotomyReport {
    pub q_mass2: f64,
    pub rows: Vec<VerdictRow>,
}

impl DichotomyReport {
    pub fn all_inconclusive(&self) -> bool {
        self.rows.iter().all(|r| r.verdict == Verdict::Inconclusive)
    }
}

fn run_dichotomy_case(cfg: &ExperimentConfig, run: &DichotomyRun) -> Result<VerdictRow> {
    let d = &cfg.dichotomy;
    let length = run.length.unwrap_or(cfg.grid.length);
    let points = run.points.unwrap_or(cfg.grid.points);
    let t_end = run.t_end.unwrap_or(cfg.solver.t_end);
    let grid = Grid::new(length, points)?;
    let mut local = cfg.clone();
    local.system.n = run.n;
    local.system.labels = None;
    local.initial.mass_scale = run.sigma;
    local.initial.amplitude2 = run.amplitude2;
    if local.initial.family == InitialFamily::Snapshot {
        return Err(CliError::Config("the dichotomy sweep builds its own initial data".into()));
    }
    let init = initial_data(&local, &grid)?;
    let u0 = init.field;
    let e0 = energy(&u0);
    let mut row = VerdictRow {
        n: run.n,
        sigma: init.sigma,
        mass2: mass(&u0),
        threshold_mass2: init.threshold_mass2,
        energy: e0,
        length,
        points,
        t_end,
        verdict: Verdict::Inconclusive,
        t_final: 0.0,
        steps: 0,
        tail_fraction: None,
        sup_decay: None,
        outer_mass_fraction: None,
        blowup_time: None,
        blowup_reason: None,
        blowup_sup_threshold: None,
        note: String::new(),
    };
    if init.sigma > d.band_low && init.sigma < d.band_high {
        row.note = format!("near-threshold band ({}, {}): inconclusive by design, not evolved", d.band_low, d.band_high);
        return Ok(row);
    }
    let initial_sup = u0.sup_norm();
    let threshold = cfg.solver.blowup_sup_threshold.unwrap_or_else(|| {
        resolution_blowup_threshold(&grid, initial_sup, d.resolution_cells, d.min_blowup_factor)
    });
    let solver = SolverConfig { t_end, ..solver_config(cfg, Some(threshold)) };
    let mut diagnostics = DiagnosticsMonitor::new(&grid, false);
    let outcome = evolve(&u0, &solver, &mut [&mut diagnostics])?;
    let acc = diagnostics.accumulator();
    let tail = acc.final_tenth_fraction();
    let decay = initial_sup / outcome.final_state.sup_norm();
    let outer = 1.0 - central_mass_fraction(&outcome.final_state);
    row.t_final = outcome.t_final;
    row.steps = outcome.steps;
    row.blowup_sup_threshold = Some(threshold);
    row.tail_fraction = Some(tail);
    row.sup_decay = Some(decay);
    row.outer_mass_fraction = Some(outer);
    match outcome.status {
        EvolutionStatus::BlowupDetected => {
            let info = outcome.blowup.expect("blowup info");
            row.verdict = Verdict::Blowup;
            row.blowup_time = Some(info.time);
            row.blowup_reason = Some(reason_name(info.reason));
            row.note = "l4_accum still growing at detection".into();
        }
        EvolutionStatus::Aborted => {
            row.note = "run aborted on a non-finite state".into();
        }
        EvolutionStatus::Completed => {
            let mut failed = Vec::new();
            if tail >= d.tail_fraction {
                failed.push(format!("tail {tail:.4} >= {}", d.tail_fraction));
            }
            if decay < d.sup_decay {
                failed.push(format!("sup decay {decay:.3} < {}", d.sup_decay));
            }
            if outer > d.wrap_tolerance {
                failed.push(format!("outer mass {outer:.2e} > {} (wrap-around)", d.wrap_tolerance));
            }
            if failed.is_empty() {
                row.verdict = Verdict::Disperses;
                row.note = "dispersal proxy satisfied".into();
            } else {
                row.note = failed.join("; ");
            }
        }
    }
    Ok(row)
}

/// Flag rows violating the ordering "no blowup strictly below a positive-energy dispersal".
pub fn flag_ordering(rows: &mut [VerdictRow]) {
    let n = rows.len();
    for a in 0..n {
        for b in 0..n {
            let (ra, rb) = (&rows[a], &rows[b]);
            if ra.n == rb.n
                && ra.sigma < rb.sigma
                && ra.verdict == Verdict::Blowup
                && rb.verdict == Verdict::Disperses
                && rb.energy > 0.0
            {
                let msg = format!("; ordering violated against sigma={:.4}, flagged for review", rb.sigma);
                rows[a].note.push_str(&msg);
            }
        }
    }
}

pub fn run_dichotomy(cfg: &ExperimentConfig) -> Result<DichotomyReport> {
    let mut rows = cfg
        .dichotomy
        .runs
        .iter()
        .map(|run| run_dichotomy_case(cfg, run))
        .collect::<Result<Vec<_>>>()?;
    flag_ordering(&mut rows);
    Ok(DichotomyReport { q_mass2: q_mass2(), rows })
}

// ---------------------------------------------------------------- identity checks

#[derive(Debug, Clone, Serialize)]
pub struct IdentityProbe {
    pub dt: f64,
    pub t: f64,
    pub morawetz_fd: f64,
    pub morawetz_formula: f64,
    pub morawetz_residual: f64,
    pub morawetz_scale: f64,
    pub virial_second_fd: f64,
    pub sixteen_e: f64,
    pub virial_relative_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MorawetzReport {
    pub probes: Vec<IdentityProbe>,
    /// Largest Morawetz residual at the finer step.
    pub max_residual: f64,
    /// Largest residual relative to the sum of term magnitudes, finer step.
    pub max_relative_residual: f64,
    /// Coarse over fine largest residual; 4 for a second-order identity check.
    pub convergence_ratio: f64,
    pub virial_max_relative_residual: f64,
    pub virial_convergence_ratio: f64,
}

fn identity_probes(u0: &Field, kernel: &MorawetzKernel, dt: f64, t_end: f64, every: f64) -> Result<Vec<IdentityProbe>> {
    let h = 2.0 * dt;
    let mut states: Vec<(f64, Field)> = Vec::new();
    let mut keep = |t: f64, u: &Field| states.push((t, u.clone()));
    let solver = SolverConfig { sample_interval: dt, ..SolverConfig::fixed_step(dt, t_end) };
    let out = evolve(u0, &solver, &mut [&mut keep])?;
    if out.status != EvolutionStatus::Completed {
        return Err(CliError::Usage("identity check run did not complete".into()));
    }
    let at = |t: f64| states.iter().find(|(s, _)| (s - t).abs() < 1e-9 * t.max(1.0)).map(|(_, u)| u);
    let mut probes = Vec::new();
    let count = (t_end / every).round() as usize;
    for k in 1..count {
        let t = k as f64 * every;
        let (Some(a), Some(b), Some(c)) = (at(t - h), at(t), at(t + h)) else { continue };
        let fd = (morawetz_action(c, kernel) - morawetz_action(a, kernel)) / (2.0 * h);
        let terms = morawetz_derivative(b, kernel);
        let scale = terms.hessian.abs() + terms.bilaplacian.abs() + terms.nonlinear.abs() + terms.momentum.abs();
        let [va, vb, vc] = [a, b, c].map(|u| virial_chain(u, [0.0, 0.0]));
        let second = (va.variance - 2.0 * vb.variance + vc.variance) / (h * h);
        probes.push(IdentityProbe {
            dt,
            t,
            morawetz_fd: fd,
            morawetz_formula: terms.total,
            morawetz_residual: (fd - terms.total).abs(),
            morawetz_scale: scale,
            virial_second_fd: second,
            sixteen_e: vb.sixteen_e,
            virial_relative_residual: ((second - vb.sixteen_e) / vb.sixteen_e).abs(),
        });
    }
    Ok(probes)
}

pub fn run_morawetz_check(cfg: &ExperimentConfig) -> Result<MorawetzReport> {
    let grid = Grid::new(cfg.grid.length, cfg.grid.points)?;
    let u0 = initial_data(cfg, &grid)?.field;
    let grid = u0.grid().clone();
    let kernel = MorawetzKernel::mollified_radial(&grid, None);
    let m = &cfg.morawetz;
    let coarse = identity_probes(&u0, &kernel, m.dt, m.t_end, m.probe_every)?;
    let fine = identity_probes(&u0, &kernel, m.dt / 2.0, m.t_end, m.probe_every)?;
    if fine.is_empty() {
        return Err(CliError::Config("morawetz.t_end leaves no interior probe time".into()));
    }
    let max_of = |p: &[IdentityProbe], f: fn(&IdentityProbe) -> f64| p.iter().map(f).fold(0.0, f64::max);
    let coarse_max = max_of(&coarse, |p| p.morawetz_residual);
    let max_residual = max_of(&fine, |p| p.morawetz_residual);
    let virial_coarse = max_of(&coarse, |p| p.virial_relative_residual);
    let virial_fine = max_of(&fine, |p| p.virial_relative_residual);
    Ok(MorawetzReport {
        max_relative_residual: max_of(&fine, |p| p.morawetz_residual / p.morawetz_scale),
        max_residual,
        convergence_ratio: coarse_max / max_residual,
        virial_max_relative_residual: virial_fine,
        virial_convergence_ratio: virial_coarse / virial_fine,
        probes: coarse.into_iter().chain(fine).collect(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ResonanceLine {
    pub j: i64,
    #[serde(rename = "N")]
    pub n: usize,
    pub cardinality: usize,
    /// Largest relative gap between the closed form and the resonant sum for component `j`.
    pub max_residual: f64,
}

pub fn run_resonance_check(cfg: &ExperimentConfig) -> Result<Vec<ResonanceLine>> {
    let grid = Grid::new(cfg.grid.length, cfg.grid.points)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut lines = Vec::new();
    for &n in &cfg.resonance.n_list {
        let labels = finite_labels(n);
        let mut worst = vec![0.0f64; n];
        for _ in 0..cfg.resonance.samples {
            let comps = (0..n)
                .map(|_| {
                    (0..grid.len())
                        .map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                        .collect()
                })
                .collect();
            let u = Field::from_components(&grid, labels.clone(), comps)?;
            let fast = apply_nonlinearity(&u);
            let slow = apply_nonlinearity_bruteforce(&u)?;
            for (c, w) in worst.iter_mut().enumerate() {
                let (a, b) = (fast.component(c), slow.component(c));
                let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
                let gap = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
                *w = w.max(gap / scale);
            }
        }
        for (c, &j) in labels.iter().enumerate() {
            lines.push(ResonanceLine {
                j,
                n,
                cardinality: resonance_set(j, &labels)?.cardinality(),
                max_residual: worst[c],
            });
        }
    }
    Ok(lines)
}
