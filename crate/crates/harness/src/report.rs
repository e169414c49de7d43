//! Experiment reports and output files.

use std::path::{Path, PathBuf};

use kuramoto_core::io::write_atomic;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::ExperimentConfig;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub experiment: String,
    pub verdict: Verdict,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub results: Map<String, Value>,
    pub files: Vec<String>,
    pub config: ExperimentConfig,
}

impl Report {
    pub fn new(cfg: &ExperimentConfig) -> Self {
        Self {
            experiment: cfg.experiment.name().into(),
            verdict: Verdict::Fail,
            seed: cfg.seed,
            checks: Vec::new(),
            notes: Vec::new(),
            results: Map::new(),
            files: Vec::new(),
            config: cfg.clone(),
        }
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn note(&mut self, msg: impl Into<String>) {
        self.notes.push(msg.into());
    }

    /// Stores a result; values that fail to serialize become `null`.
    pub fn set(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.results.insert(key.into(), v);
    }

    pub fn result(&self, key: &str) -> Option<&Value> {
        self.results.get(key)
    }

    pub fn result_f64(&self, key: &str) -> Option<f64> {
        self.results.get(key).and_then(Value::as_f64)
    }

    pub fn find(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Pass iff there is at least one check and all of them pass.
    pub fn finalize(&mut self) {
        let ok = !self.checks.is_empty() && self.checks.iter().all(|c| c.passed);
        self.verdict = if ok { Verdict::Pass } else { Verdict::Fail };
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("report.json");
        let mut text = serde_json::to_vec_pretty(self).map_err(kuramoto_core::Error::from)?;
        text.push(b'\n');
        write_atomic(&path, &text)?;
        Ok(path)
    }
}

/// Output directory that remembers what was written to it.
#[derive(Debug)]
pub struct Output {
    dir: PathBuf,
    files: Vec<String>,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Path for `name`, recorded in the file list.
    pub fn file(&mut self, name: &str) -> PathBuf {
        self.files.push(name.into());
        self.dir.join(name)
    }

    pub fn columns(&mut self, name: &str, header: &[&str], columns: &[&[f64]]) -> Result<()> {
        let path = self.file(name);
        kuramoto_core::io::write_columns(&path, header, columns)?;
        Ok(())
    }

    /// Moves the file list into the report, then writes the report.
    pub fn finish(self, report: &mut Report) -> Result<PathBuf> {
        report.files = self.files;
        report.finalize();
        report.write(&self.dir)
    }
}
