//! Deterministic artifact emission: CSV files (comma separator, '.' decimal,
//! header row, LF endings, shortest-roundtrip float formatting) and the
//! run-manifest JSON holding everything needed to reproduce a run.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use serde::Serialize;

use crate::config::{CliError, CliResult, Resolved};

/// One CSV artifact built in memory and written atomically at the end.
pub struct Csv {
    path: PathBuf,
    buf: String,
}

impl Csv {
    pub fn new(dir: &Path, name: &str, header: &str) -> Csv {
        Csv {
            path: dir.join(name),
            buf: format!("{header}\n"),
        }
    }

    /// Appends one row; values format via `Display`, so floats are emitted
    /// with the shortest representation that round-trips — byte-stable
    /// across reruns.
    pub fn row(&mut self, values: &[&dyn std::fmt::Display]) {
        for (i, v) in values.iter().enumerate() {
            if i > 0 {
                self.buf.push(',');
            }
            self.buf.push_str(&v.to_string());
        }
        self.buf.push('\n');
    }

    pub fn write(self) -> CliResult<PathBuf> {
        fs::write(&self.path, self.buf.as_bytes())?;
        Ok(self.path)
    }
}

/// Run manifest: resolved configuration, provenance, timing, and the
/// expansion order the propagator actually used at every step.
#[derive(Serialize)]
pub struct Manifest<'a> {
    pub config: &'a Resolved,
    pub git_describe: String,
    pub wall_time_seconds: f64,
    pub np_per_step: &'a [usize],
    pub artifacts: Vec<String>,
    /// Experiment-specific scalar results worth recording (settling time,
    /// fitted velocity, ...).
    pub results: serde_json::Map<String, serde_json::Value>,
}

/// `git describe --always --tags` of the working tree, or "unknown" outside
/// a repository.
pub fn git_describe() -> String {
    Command::new("git")
        .args(["describe", "--always", "--tags", "--dirty"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unknown".into())
}

/// Collects artifacts for one run and writes `manifest.json` last.
pub struct RunDir {
    pub dir: PathBuf,
    started: Instant,
    artifacts: Vec<String>,
    results: serde_json::Map<String, serde_json::Value>,
}

impl RunDir {
    pub fn create(config: &Resolved) -> CliResult<RunDir> {
        let dir = config.out_dir.join(&config.experiment);
        fs::create_dir_all(&dir)?;
        Ok(RunDir {
            dir,
            started: Instant::now(),
            artifacts: Vec::new(),
            results: serde_json::Map::new(),
        })
    }

    pub fn csv(&self, name: &str, header: &str) -> Csv {
        Csv::new(&self.dir, name, header)
    }

    pub fn finish_csv(&mut self, csv: Csv) -> CliResult<()> {
        let path = csv.write()?;
        self.note_artifact(&path);
        Ok(())
    }

    pub fn note_artifact(&mut self, path: &Path) {
        if let Some(name) = path.file_name() {
            self.artifacts.push(name.to_string_lossy().into_owned());
        }
    }

    pub fn record(&mut self, key: &str, value: impl Serialize) {
        if let Ok(v) = serde_json::to_value(value) {
            self.results.insert(key.to_string(), v);
        }
    }

    pub fn write_manifest(mut self, config: &Resolved, np_per_step: &[usize]) -> CliResult<()> {
        self.artifacts.sort();
        let manifest = Manifest {
            config,
            git_describe: git_describe(),
            wall_time_seconds: self.started.elapsed().as_secs_f64(),
            np_per_step,
            artifacts: self.artifacts,
            results: self.results,
        };
        let text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| CliError::Run(e.to_string()))?;
        fs::write(self.dir.join("manifest.json"), text)?;
        Ok(())
    }
}
