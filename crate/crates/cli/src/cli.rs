use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::config::{ExperimentConfig, ExperimentKind, GroundStateMethodChoice, InitialFamily};
use crate::error::{CliError, Result};
use crate::experiments::{self, q_mass2, threshold_mass2, Verdict};
use crate::output::OutputDir;

#[derive(Debug, Parser)]
#[command(name = "rnls", version, about = "Coupled focusing cubic NLS experiments on a periodic box")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML configuration; command-line flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (default `rnls-out/<experiment>`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Box side.
    #[arg(long = "L")]
    pub length: Option<f64>,
    /// Grid points per side (power of two).
    #[arg(long = "M")]
    pub points: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute the Townes profile by Petviashvili iteration and/or radial shooting.
    GroundState {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        tol: Option<f64>,
        /// petviashvili, shooting or both.
        #[arg(long)]
        method: Option<GroundStateMethodChoice>,
    },
    /// Tabulate predicted against measured Gagliardo-Nirenberg constants.
    GnConstant {
        #[command(flatten)]
        grid: GridArgs,
        /// Comma separated component counts.
        #[arg(long = "N-list", value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
    },
    /// Evolve one initial datum with full diagnostics.
    Simulate {
        #[command(flatten)]
        grid: GridArgs,
        /// gaussian, ground-state, random-bumps or snapshot:PATH.
        #[arg(long)]
        init: Option<String>,
        /// Initial mass as a fraction of the threshold.
        #[arg(long = "mass-scale")]
        mass_scale: Option<f64>,
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long = "t-end")]
        t_end: Option<f64>,
        #[arg(long = "dt-max")]
        dt_max: Option<f64>,
    },
    /// Sweep sub- and super-threshold data and classify each run.
    Dichotomy,
    /// Check the Morawetz and virial identities along a run.
    MorawetzCheck {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Compare the closed-form nonlinearity against the resonant sum.
    ResonanceCheck,
}

impl Command {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            Command::GroundState { .. } => ExperimentKind::GroundState,
            Command::GnConstant { .. } => ExperimentKind::GnConstant,
            Command::Simulate { .. } => ExperimentKind::Simulate,
            Command::Dichotomy => ExperimentKind::Dichotomy,
            Command::MorawetzCheck { .. } => ExperimentKind::MorawetzCheck,
            Command::ResonanceCheck => ExperimentKind::ResonanceCheck,
        }
    }
}

fn apply_grid(cfg: &mut ExperimentConfig, g: &GridArgs) {
    if let Some(l) = g.length {
        cfg.grid.length = l;
    }
    if let Some(m) = g.points {
        cfg.grid.points = m;
    }
}

fn parse_init(cfg: &mut ExperimentConfig, init: &str) -> Result<()> {
    if let Some(path) = init.strip_prefix("snapshot:") {
        cfg.initial.family = InitialFamily::Snapshot;
        cfg.initial.snapshot = Some(PathBuf::from(path));
        return Ok(());
    }
    cfg.initial.family = match init {
        "gaussian" => InitialFamily::Gaussian,
        "ground-state" => InitialFamily::GroundState,
        "random-bumps" => InitialFamily::RandomBumps,
        other => return Err(CliError::Usage(format!("unknown --init {other:?}"))),
    };
    Ok(())
}

/// Merge the optional config file, the subcommand defaults and the flags.
pub fn resolve_config(cli: &Cli) -> Result<ExperimentConfig> {
    let kind = cli.command.kind();
    let mut cfg = match &cli.common.config {
        Some(path) => {
            let cfg = ExperimentConfig::load(path)?;
            if cfg.experiment != kind {
                return Err(CliError::Usage(format!(
                    "config describes experiment {}, but the subcommand is {kind}",
                    cfg.experiment
                )));
            }
            cfg
        }
        None => ExperimentConfig::defaults(kind),
    };
    if let Some(seed) = cli.common.seed {
        cfg.seed = seed;
    }
    if let Some(t) = cli.common.threads {
        cfg.threads = Some(t);
    }
    if let Some(out) = &cli.common.out {
        cfg.out = Some(out.clone());
    }
    match &cli.command {
        Command::GroundState { grid, tol, method } => {
            apply_grid(&mut cfg, grid);
            if let Some(t) = tol {
                cfg.ground_state.tolerance = *t;
            }
            if let Some(m) = method {
                cfg.ground_state.method = *m;
            }
        }
        Command::GnConstant { grid, n_list } => {
            apply_grid(&mut cfg, grid);
            if let Some(list) = n_list {
                cfg.gn.n_list = list.clone();
            }
        }
        Command::Simulate { grid, init, mass_scale, n, t_end, dt_max } => {
            apply_grid(&mut cfg, grid);
            if let Some(init) = init {
                parse_init(&mut cfg, init)?;
            }
            if let Some(s) = mass_scale {
                cfg.initial.mass_scale = Some(*s);
                cfg.initial.amplitude2 = None;
            }
            if let Some(n) = n {
                cfg.system.n = *n;
                cfg.system.labels = None;
            }
            if let Some(t) = t_end {
                cfg.solver.t_end = *t;
            }
            if let Some(d) = dt_max {
                cfg.solver.dt_max = *d;
            }
        }
        Command::MorawetzCheck { grid, dt } => {
            apply_grid(&mut cfg, grid);
            if let Some(d) = dt {
                cfg.morawetz.dt = *d;
            }
        }
        Command::Dichotomy | Command::ResonanceCheck => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Process exit status of a finished experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// Every dichotomy run came out inconclusive.
    Inconclusive,
}

/// Result of [`execute`]: exit status and the text meant for the terminal.
pub struct Executed {
    pub outcome: Outcome,
    pub console: String,
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let cfg = resolve_config(cli)?;
    if let Some(t) = cfg.threads {
        // a second initialisation in the same process is harmless
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let root = cfg.out.clone().unwrap_or_else(|| PathBuf::from("rnls-out").join(cfg.experiment.name()));
    let out = OutputDir::create(root)?;
    let done = execute(&cfg, &out)?;
    print!("{}", done.console);
    println!("outputs in {}", out.root().display());
    Ok(done.outcome)
}

/// Run `cfg` and write every output into `out`.
/// Nothing is printed; the console summary is returned instead.
pub fn execute(cfg: &ExperimentConfig, out: &OutputDir) -> Result<Executed> {
    let mut outcome = Outcome::Success;
    let mut console = String::new();
    let (thresholds, summary) = match cfg.experiment {
        ExperimentKind::GroundState => {
            let report = experiments::run_ground_state(cfg)?;
            out.write_json("ground_state.json", &report)?;
            if let Some(profile) = &report.profile {
                rnls_core::snapshot::save_snapshot(out.path("ground_state.rnls"), 0.0, profile)?;
            }
            let _ = writeln!(console, "{}", serde_json::to_string_pretty(&report)?);
            let th = json!({ "tolerance": cfg.ground_state.tolerance, "max_iter": cfg.ground_state.max_iter });
            (th, serde_json::to_value(&report)?)
        }
        ExperimentKind::GnConstant => {
            let table = experiments::run_gn_constants(cfg)?;
            out.write_csv("gn_constants.csv", &table.rows)?;
            for r in &table.rows {
                let _ = writeln!(console, 
                    "N={:>3}  C_N={:.10}  W={}  threshold^2={:.10}",
                    r.n,
                    r.predicted_constant,
                    r.measured_weinstein.map_or("-".into(), |w| format!("{w:.10}")),
                    r.threshold_mass2
                );
            }
            let th = json!({ "q_mass2": table.q_mass2, "tolerance": cfg.ground_state.tolerance });
            (th, serde_json::to_value(&table.rows)?)
        }
        ExperimentKind::Simulate => {
            let report = experiments::run_simulation(cfg, Some(out))?;
            out.write_diagnostics("diagnostics.ndjson", &report.records)?;
            out.write_json("summary.json", &report.summary)?;
            let _ = writeln!(console, "{}", serde_json::to_string_pretty(&report.summary)?);
            let th = json!({
                "threshold_mass2": threshold_mass2(report.summary.n),
                "q_mass2": q_mass2(),
                "blowup_sup_threshold": report.summary.blowup_sup_threshold,
                "blowup_default_factor": rnls_core::solver::DEFAULT_BLOWUP_FACTOR,
                "dt_min": cfg.solver.dt_min,
                "cfl_constant": cfg.solver.cfl_constant,
            });
            (th, serde_json::to_value(&report.summary)?)
        }
        ExperimentKind::Dichotomy => {
            let report = experiments::run_dichotomy(cfg)?;
            out.write_csv("verdicts.csv", &report.rows)?;
            out.write_json("dichotomy.json", &report)?;
            for r in &report.rows {
                let _ = writeln!(console, "N={} sigma={:.4} E={:.4} -> {:?} ({})", r.n, r.sigma, r.energy, r.verdict, r.note);
            }
            if report.all_inconclusive() {
                outcome = Outcome::Inconclusive;
            }
            let d = &cfg.dichotomy;
            let th = json!({
                "q_mass2": report.q_mass2,
                "tail_fraction": d.tail_fraction,
                "sup_decay": d.sup_decay,
                "wrap_tolerance": d.wrap_tolerance,
                "band": [d.band_low, d.band_high],
                "resolution_cells": d.resolution_cells,
                "min_blowup_factor": d.min_blowup_factor,
                "blowup_sup_threshold": cfg.solver.blowup_sup_threshold,
                "dt_min": cfg.solver.dt_min,
            });
            let counts = json!({
                "disperses": report.rows.iter().filter(|r| r.verdict == Verdict::Disperses).count(),
                "blowup": report.rows.iter().filter(|r| r.verdict == Verdict::Blowup).count(),
                "inconclusive": report.rows.iter().filter(|r| r.verdict == Verdict::Inconclusive).count(),
            });
            (th, counts)
        }
        ExperimentKind::MorawetzCheck => {
            let report = experiments::run_morawetz_check(cfg)?;
            out.write_csv("identity_probes.csv", &report.probes)?;
            let _ = writeln!(console, 
                "morawetz max residual {:.3e} (relative {:.3e}, ratio {:.2}); virial relative {:.3e} (ratio {:.2})",
                report.max_residual,
                report.max_relative_residual,
                report.convergence_ratio,
                report.virial_max_relative_residual,
                report.virial_convergence_ratio
            );
            let th = json!({ "dt": cfg.morawetz.dt, "fd_half_width": 2.0 * cfg.morawetz.dt });
            let summary = json!({
                "max_residual": report.max_residual,
                "max_relative_residual": report.max_relative_residual,
                "convergence_ratio": report.convergence_ratio,
                "virial_max_relative_residual": report.virial_max_relative_residual,
                "virial_convergence_ratio": report.virial_convergence_ratio,
            });
            (th, summary)
        }
        ExperimentKind::ResonanceCheck => {
            let lines = experiments::run_resonance_check(cfg)?;
            out.write_ndjson("resonance.ndjson", &lines)?;
            for l in &lines {
                let _ = writeln!(console, "{}", serde_json::to_string(l)?);
            }
            let worst = lines.iter().map(|l| l.max_residual).fold(0.0, f64::max);
            (json!({ "samples": cfg.resonance.samples }), json!({ "max_residual": worst }))
        }
    };
    out.write_manifest(cfg, thresholds, summary)?;
    Ok(Executed { outcome, console })
}
