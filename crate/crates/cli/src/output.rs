//! Output directory layout: result files plus a `manifest.json` that echoes
//! the configuration, seed, thread count and every threshold in force.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use rnls_core::diagnostics::write_ndjson;
use rnls_core::snapshot::save_snapshot;
use rnls_core::solver::Monitor;
use rnls_core::{DiagnosticsRecord, Field};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

pub struct OutputDir {
    root: PathBuf,
}

impl OutputDir {
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root)?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    fn writer(&self, name: &str) -> Result<BufWriter<File>> {
        Ok(BufWriter::new(File::create(self.path(name))?))
    }

    pub fn write_json<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> Result<()> {
        let mut w = self.writer(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    pub fn write_csv<T: Serialize>(&self, name: &str, rows: &[T]) -> Result<()> {
        let mut w = csv::Writer::from_writer(self.writer(name)?);
        for row in rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// One compact JSON object per line.
    pub fn write_ndjson<T: Serialize>(&self, name: &str, lines: &[T]) -> Result<()> {
        let mut w = self.writer(name)?;
        for line in lines {
            serde_json::to_writer(&mut w, line)?;
            writeln!(w)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_diagnostics(&self, name: &str, records: &[DiagnosticsRecord]) -> Result<()> {
        let mut w = self.writer(name)?;
        write_ndjson(records, &mut w)?;
        w.flush()?;
        Ok(())
    }

    /// Write `manifest.json`. No timestamps, so identical runs give identical bytes.
    pub fn write_manifest(&self, cfg: &ExperimentConfig, thresholds: Value, summary: Value) -> Result<()> {
        let manifest = json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "experiment": cfg.experiment.name(),
            "seed": cfg.seed,
            "threads": effective_threads(cfg),
            "config": serde_json::to_value(cfg)?,
            "config_toml": cfg.to_toml()?,
            "thresholds": thresholds,
            "summary": summary,
        });
        self.write_json("manifest.json", &manifest)
    }
}

pub fn effective_threads(cfg: &ExperimentConfig) -> usize {
    cfg.threads.unwrap_or_else(rayon::current_num_threads)
}

/// Monitor writing every `every`-th sample as a binary snapshot.
pub struct SnapshotWriter<'a> {
    dir: &'a OutputDir,
    every: usize,
    seen: usize,
    written: usize,
    last_time: Option<f64>,
    error: Option<CliError>,
}

impl<'a> SnapshotWriter<'a> {
    pub fn new(dir: &'a OutputDir, every: usize) -> Self {
        Self { dir, every: every.max(1), seen: 0, written: 0, last_time: None, error: None }
    }

    fn save(&mut self, t: f64, u: &Field) {
        if self.error.is_some() {
            return;
        }
        let name = format!("snapshot_{:05}.rnls", self.written);
        match save_snapshot(self.dir.path(&name), t, u) {
            Ok(()) => {
                self.written += 1;
                self.last_time = Some(t);
            }
            Err(e) => self.error = Some(e.into()),
        }
    }

    /// Store the end state unless the last sample already covered it.
    pub fn write_final(&mut self, t: f64, u: &Field) -> Result<()> {
        if self.last_time != Some(t) {
            self.save(t, u);
        }
        Ok(())
    }

    /// Number of snapshots written, or the first write error.
    pub fn finish(self) -> Result<usize> {
        match self.error {
            Some(e) => Err(e),
            None => Ok(self.written),
        }
    }
}

impl Monitor<f64> for SnapshotWriter<'_> {
    fn observe(&mut self, t: f64, u: &Field) {
        if self.seen.is_multiple_of(self.every) {
            self.save(t, u);
        }
        self.seen += 1;
    }
}
