//! Run directories: CSV tables, result rows and the JSON manifest.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;

use super::config::{ExperimentConfig, ExperimentKind};
use crate::error::{Error, Result};
use crate::observables::format_float;

pub const MANIFEST_FILE: &str = "manifest.json";
pub const RESULTS_FILE: &str = "results.csv";

/// One scalar result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub experiment: ExperimentKind,
    pub n_spins: usize,
    pub alpha: Option<f64>,
    pub tau: Option<f64>,
    pub observable: String,
    pub value: f64,
    pub metadata: String,
}

impl ResultRow {
    pub fn new(
        experiment: ExperimentKind,
        n_spins: usize,
        point: Option<(f64, f64)>,
        observable: impl Into<String>,
        value: f64,
    ) -> Self {
        ResultRow {
            experiment,
            n_spins,
            alpha: point.map(|p| p.0),
            tau: point.map(|p| p.1),
            observable: observable.into(),
            value,
            metadata: String::new(),
        }
    }

    pub fn with_metadata(mut self, metadata: impl Into<String>) -> Self {
        self.metadata = metadata.into();
        self
    }
}

pub fn write_result_rows<W: Write>(mut out: W, rows: &[ResultRow]) -> std::io::Result<()> {
    writeln!(out, "experiment,n_spins,alpha,tau,observable,value,metadata")?;
    let opt = |x: Option<f64>| x.map(format_float).unwrap_or_default();
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.experiment,
            r.n_spins,
            opt(r.alpha),
            opt(r.tau),
            r.observable,
            format_float(r.value),
            r.metadata.replace(',', ";")
        )?;
    }
    Ok(())
}

/// Everything recorded about one run besides its tables.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub experiment: ExperimentKind,
    pub config_hash: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub started_unix: f64,
    pub wall_clock_seconds: f64,
    pub threads: usize,
    pub parallel: bool,
    pub outputs: Vec<String>,
    /// Conditions a reader must not miss, e.g. an oracle mismatch.
    pub flags: Vec<String>,
    pub notes: Vec<String>,
}

/// Files written so far by a run; removed again if the run fails.
pub struct RunOutput {
    dir: PathBuf,
    created_dir: bool,
    files: Vec<PathBuf>,
    started: Instant,
    started_unix: f64,
    pub flags: Vec<String>,
    pub notes: Vec<String>,
}

impl RunOutput {
    pub fn create(dir: &Path) -> Result<Self> {
        let created_dir = !dir.exists();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let started_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs_f64())
            .unwrap_or(0.0);
        Ok(RunOutput {
            dir: dir.to_path_buf(),
            created_dir,
            files: Vec::new(),
            started: Instant::now(),
            started_unix,
            flags: Vec::new(),
            notes: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[PathBuf] {
        &self.files
    }

    /// Creates `name` in the run directory and hands a buffered writer to `fill`.
    pub fn write_file<F>(&mut self, name: &str, fill: F) -> Result<PathBuf>
    where
        F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        self.files.push(path.clone());
        let mut w = BufWriter::new(file);
        fill(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    pub fn write_results(&mut self, rows: &[ResultRow]) -> Result<PathBuf> {
        self.write_file(RESULTS_FILE, |w| write_result_rows(w, rows))
    }

    /// Writes the manifest last and returns it.
    pub fn finish(
        mut self,
        experiment: ExperimentKind,
        config: &ExperimentConfig,
    ) -> Result<RunSummary> {
        let outputs = self
            .files
            .iter()
            .filter_map(|p| p.file_name())
            .map(|n| n.to_string_lossy().into_owned())
            .collect();
        let manifest = Manifest {
            experiment,
            config_hash: config.hash(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            started_unix: self.started_unix,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            threads: worker_threads(),
            parallel: cfg!(feature = "parallel"),
            outputs,
            flags: self.flags.clone(),
            notes: self.notes.clone(),
        };
        let path = self.write_file(MANIFEST_FILE, |w| {
            serde_json::to_writer_pretty(&mut *w, &manifest).map_err(std::io::Error::other)?;
            writeln!(w)
        })?;
        Ok(RunSummary {
            manifest: path,
            files: self.files,
            flags: manifest.flags,
        })
    }

    /// Deletes every file written by this run.
    pub fn discard(self) {
        for f in &self.files {
            if let Err(e) = std::fs::remove_file(f) {
                log::warn!("could not remove partial output {}: {e}", f.display());
            }
        }
        if self.created_dir {
            let _ = std::fs::remove_dir(&self.dir);
        }
    }
}

/// What a finished run left on disk.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub manifest: PathBuf,
    pub files: Vec<PathBuf>,
    pub flags: Vec<String>,
}

pub fn worker_threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

/// `1.5` → `1.5`, `0.01` → `0.01`; keeps file names short and unambiguous.
pub fn point_label(alpha: f64, tau: f64) -> String {
    format!("alpha{alpha}_tau{tau}")
}
