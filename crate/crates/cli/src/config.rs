//! Experiment configuration.
//!
//! Configurations are TOML documents. Unknown keys are rejected everywhere;
//! every section except `[grid]` may be omitted and falls back to the
//! defaults below.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    GroundState,
    GnConstant,
    Simulate,
    Dichotomy,
    MorawetzCheck,
    ResonanceCheck,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::GroundState => "ground-state",
            Self::GnConstant => "gn-constant",
            Self::Simulate => "simulate",
            Self::Dichotomy => "dichotomy",
            Self::MorawetzCheck => "morawetz-check",
            Self::ResonanceCheck => "resonance-check",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub grid: GridConfig,
    #[serde(default)]
    pub system: SystemConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub ground_state: GroundStateSection,
    #[serde(default)]
    pub gn: GnSection,
    #[serde(default)]
    pub dichotomy: DichotomySection,
    #[serde(default)]
    pub morawetz: MorawetzSection,
    #[serde(default)]
    pub resonance: ResonanceSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Box side `L`.
    pub length: f64,
    /// Points per axis `M`.
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SystemConfig {
    pub n: usize,
    /// Explicit component labels; overrides `n` when present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<i64>>,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self { n: 1, labels: None }
    }
}

impl SystemConfig {
    pub fn labels(&self) -> Vec<i64> {
        self.labels.clone().unwrap_or_else(|| rnls_core::finite_labels(self.n))
    }

    pub fn size(&self) -> usize {
        self.labels.as_ref().map_or(self.n, Vec::len)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialFamily {
    /// `a e^{-|x|^2/2}` in every component.
    Gaussian,
    /// The vector ground state `Q_N`.
    GroundState,
    /// A few seeded, randomly placed and modulated Gaussian bumps per component.
    RandomBumps,
    Snapshot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialConfig {
    pub family: InitialFamily,
    /// `σ`: data are rescaled so that `‖u_0‖^2 = σ · threshold^2`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass_scale: Option<f64>,
    /// Per-component squared Gaussian amplitude; replaces `mass_scale`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub amplitude2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<PathBuf>,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self { family: InitialFamily::Gaussian, mass_scale: None, amplitude2: None, snapshot: None }
    }
}

/// Mass scale used when neither `mass_scale` nor `amplitude2` is given.
pub const DEFAULT_MASS_SCALE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub dt_max: f64,
    pub cfl_constant: f64,
    pub t_end: f64,
    /// Absolute sup-norm blowup threshold.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub blowup_sup_threshold: Option<f64>,
    /// Derive the threshold from the grid resolution instead of `1000 ×` the initial sup.
    pub resolution_limited_blowup: bool,
    pub dt_min: f64,
    pub dealias: bool,
    pub sample_interval: f64,
    /// Evaluate the Morawetz action in the diagnostics stream.
    pub morawetz: bool,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            dt_max: 1e-2,
            cfl_constant: 0.1,
            t_end: 1.0,
            blowup_sup_threshold: None,
            resolution_limited_blowup: false,
            dt_min: 1e-9,
            dealias: false,
            sample_interval: 0.1,
            morawetz: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub snapshots: bool,
    /// Write a snapshot at every `snapshot_every`-th sample (the final state is always written).
    pub snapshot_every: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { snapshots: true, snapshot_every: 1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroundStateMethodChoice {
    Petviashvili,
    Shooting,
    Both,
}

impl FromStr for GroundStateMethodChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "petviashvili" => Ok(Self::Petviashvili),
            "shooting" => Ok(Self::Shooting),
            "both" => Ok(Self::Both),
            other => Err(format!("unknown method `{other}` (petviashvili, shooting, both)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GroundStateSection {
    pub method: GroundStateMethodChoice,
    pub tolerance: f64,
    pub max_iter: usize,
    pub r_max: f64,
    pub dr: f64,
}

impl Default for GroundStateSection {
    fn default() -> Self {
        Self {
            method: GroundStateMethodChoice::Both,
            tolerance: rnls_core::groundstate::DEFAULT_TOLERANCE,
            max_iter: 500,
            r_max: 20.0,
            dr: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GnSection {
    pub n_list: Vec<usize>,
}

impl Default for GnSection {
    fn default() -> Self {
        Self { n_list: vec![1, 2, 3, 5] }
    }
}

/// One initial datum of the dichotomy sweep. Grid and horizon fall back to
/// the top-level `[grid]` and `solver.t_end`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DichotomyRun {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DichotomySection {
    pub runs: Vec<DichotomyRun>,
    /// Largest admissible share of `l4_accum` gained in the final tenth of the run.
    pub tail_fraction: f64,
    /// Required ratio of initial to final sup norm.
    pub sup_decay: f64,
    /// Largest admissible mass fraction outside the central half box at the end.
    pub wrap_tolerance: f64,
    /// `σ` strictly inside `(band_low, band_high)` is inconclusive by design.
    pub band_low: f64,
    pub band_high: f64,
    /// Collapse is declared once the sup norm passes `Q(0) / (cells · dx)` ...
    pub resolution_cells: f64,
    /// ... or this multiple of the initial sup norm, whichever is larger.
    pub min_blowup_factor: f64,
}

impl Default for DichotomySection {
    fn default() -> Self {
        let dispersing = |n| DichotomyRun {
            n,
            sigma: Some(0.5),
            amplitude2: None,
            length: Some(128.0),
            points: Some(256),
            t_end: Some(4.0),
        };
        Self {
            runs: vec![
                dispersing(1),
                dispersing(2),
                DichotomyRun {
                    n: 1,
                    sigma: None,
                    amplitude2: Some(8.0),
                    length: Some(16.0),
                    points: Some(512),
                    t_end: Some(2.0),
                },
            ],
            tail_fraction: 0.02,
            sup_decay: 3.0,
            wrap_tolerance: 1e-3,
            band_low: 0.95,
            band_high: 1.05,
            resolution_cells: 6.0,
            min_blowup_factor: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MorawetzSection {
    /// Base step; the check is repeated at half this step.
    pub dt: f64,
    pub t_end: f64,
    /// Spacing of the probe times.
    pub probe_every: f64,
}

impl Default for MorawetzSection {
    fn default() -> Self {
        Self { dt: 0.01, t_end: 1.0, probe_every: 0.2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResonanceSection {
    pub n_list: Vec<usize>,
    pub samples: usize,
}

impl Default for ResonanceSection {
    fn default() -> Self {
        Self { n_list: (1..=8).collect(), samples: 50 }
    }
}

impl ExperimentConfig {
    /// Defaults for an experiment when no configuration file is given.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let (length, points) = match kind {
            ExperimentKind::GroundState | ExperimentKind::GnConstant => (32.0, 256),
            ExperimentKind::Simulate => (32.0, 128),
            ExperimentKind::Dichotomy => (128.0, 256),
            ExperimentKind::MorawetzCheck => (24.0, 128),
            ExperimentKind::ResonanceCheck => (6.0, 16),
        };
        let mut cfg = Self {
            experiment: kind,
            seed: 0,
            threads: None,
            out: None,
            grid: GridConfig { length, points },
            system: SystemConfig::default(),
            initial: InitialConfig::default(),
            solver: SolverSection::default(),
            output: OutputSection::default(),
            ground_state: GroundStateSection::default(),
            gn: GnSection::default(),
            dichotomy: DichotomySection::default(),
            morawetz: MorawetzSection::default(),
            resonance: ResonanceSection::default(),
        };
        match kind {
            ExperimentKind::Dichotomy => cfg.solver.t_end = 4.0,
            ExperimentKind::MorawetzCheck => {
                cfg.system.n = 2;
                cfg.initial.family = InitialFamily::RandomBumps;
                cfg.initial.mass_scale = Some(0.3);
            }
            _ => {}
        }
        cfg
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.grid.points < 4 || !self.grid.points.is_multiple_of(2) || !(self.grid.length > 0.0) {
            return bad(format!("grid needs even points >= 4 and positive length, got {:?}", self.grid));
        }
        if self.system.size() == 0 {
            return bad("system needs at least one component".into());
        }
        if let Some(s) = self.initial.mass_scale {
            if !(s > 0.0) {
                return bad(format!("initial.mass_scale must be positive, got {s}"));
            }
        }
        if let Some(a) = self.initial.amplitude2 {
            if !(a > 0.0) {
                return bad(format!("initial.amplitude2 must be positive, got {a}"));
            }
            if self.initial.mass_scale.is_some() {
                return bad("initial.mass_scale and initial.amplitude2 are mutually exclusive".into());
            }
        }
        if self.initial.family == InitialFamily::Snapshot && self.initial.snapshot.is_none() {
            return bad("initial.family = \"snapshot\" requires initial.snapshot".into());
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1".into());
        }
        if self.output.snapshot_every == 0 {
            return bad("output.snapshot_every must be at least 1".into());
        }
        for (i, run) in self.dichotomy.runs.iter().enumerate() {
            if run.n == 0 {
                return bad(format!("dichotomy.runs[{i}].n must be at least 1"));
            }
            match (run.sigma, run.amplitude2) {
                (Some(s), None) if s > 0.0 => {}
                (None, Some(a)) if a > 0.0 => {}
                _ => return bad(format!("dichotomy.runs[{i}] needs exactly one positive sigma or amplitude2")),
            }
        }
        if self.resonance.samples == 0 || self.resonance.n_list.is_empty() {
            return bad("resonance needs samples >= 1 and a non-empty n_list".into());
        }
        if self.gn.n_list.contains(&0) {
            return bad("gn.n_list entries must be at least 1".into());
        }
        Ok(())
    }
}
