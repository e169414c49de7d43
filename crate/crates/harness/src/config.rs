//! Flat TOML experiment configuration.
//!
//! Every key is optional except `experiment`; missing keys fall back to the
//! benchmark values of the chosen experiment. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use kuramoto_core::FrequencyDensity64;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    #[serde(alias = "sync_identical")]
    Sync,
    Trapping,
    Contraction,
    #[serde(alias = "meanfield_convergence")]
    Meanfield,
    #[serde(alias = "lemma54_audit")]
    Lemma54,
    #[serde(alias = "solver_crosscheck")]
    Crosscheck,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Sync => "sync",
            Experiment::Trapping => "trapping",
            Experiment::Contraction => "contraction",
            Experiment::Meanfield => "meanfield",
            Experiment::Lemma54 => "lemma54",
            Experiment::Crosscheck => "crosscheck",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrequencyKind {
    Uniform,
    Tent,
    Atoms,
    Identical,
}

/// The file as written, before defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub experiment: Option<Experiment>,
    pub coupling: Option<f64>,
    pub frequency: Option<FrequencyKind>,
    pub frequency_radius: Option<f64>,
    pub frequency_cells: Option<usize>,
    pub frequency_atoms: Option<Vec<[f64; 2]>>,
    pub initial: Option<String>,
    pub initial_b: Option<String>,
    pub diameter: Option<f64>,
    pub diameter_b: Option<f64>,
    pub centre: Option<f64>,
    pub centre_b: Option<f64>,
    pub shift: Option<f64>,
    pub n: Option<usize>,
    pub m_theta: Option<usize>,
    pub m_theta_init: Option<usize>,
    pub m_eta: Option<usize>,
    pub dt: Option<f64>,
    pub t_end: Option<f64>,
    pub sample_every: Option<usize>,
    pub window: Option<f64>,
    pub ladder: Option<Vec<usize>>,
    pub continuum_m_eta: Option<usize>,
    pub orders: Option<Vec<f64>>,
    pub fields: Option<usize>,
    pub refinements: Option<usize>,
    pub series_interval: Option<f64>,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
}

/// Frequency law as configured.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencySpec {
    pub kind: FrequencyKind,
    pub radius: f64,
    pub cells: usize,
    pub atoms: Vec<[f64; 2]>,
}

impl FrequencySpec {
    pub fn build(&self) -> Result<FrequencyDensity64> {
        let g = match self.kind {
            FrequencyKind::Uniform => FrequencyDensity64::uniform(self.radius, self.cells)?,
            FrequencyKind::Tent => FrequencyDensity64::tent(self.radius, self.cells)?,
            FrequencyKind::Atoms => {
                FrequencyDensity64::atoms(self.atoms.iter().map(|a| (a[0], a[1])).collect())?
            }
            FrequencyKind::Identical => FrequencyDensity64::identical(),
        };
        Ok(g)
    }
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub coupling: f64,
    pub frequency: FrequencySpec,
    pub initial: String,
    pub initial_b: String,
    pub diameter: f64,
    pub diameter_b: f64,
    pub centre: f64,
    pub centre_b: f64,
    pub shift: Option<f64>,
    pub n: usize,
    pub m_theta: usize,
    pub m_theta_init: usize,
    pub m_eta: usize,
    pub dt: f64,
    pub t_end: Option<f64>,
    pub sample_every: usize,
    pub window: f64,
    pub ladder: Vec<usize>,
    pub continuum_m_eta: usize,
    pub orders: Vec<f64>,
    pub fields: usize,
    pub refinements: usize,
    pub series_interval: f64,
    pub seed: u64,
    pub output_dir: PathBuf,
}

struct Defaults {
    coupling: f64,
    frequency: FrequencyKind,
    radius: f64,
    cells: usize,
    atoms: Vec<[f64; 2]>,
    initial: &'static str,
    initial_b: &'static str,
    diameter: f64,
    diameter_b: f64,
    n: usize,
    m_theta: usize,
    m_eta: usize,
    t_end: Option<f64>,
}

fn defaults(e: Experiment) -> Defaults {
    let pair = vec![[-0.5, 0.5], [0.5, 0.5]];
    let base = Defaults {
        coupling: 1.0,
        frequency: FrequencyKind::Identical,
        radius: 0.5,
        cells: 8,
        atoms: pair.clone(),
        initial: "equispaced",
        initial_b: "raised-cosine",
        diameter: 2.0,
        diameter_b: 1.6,
        n: 200,
        m_theta: 512,
        m_eta: 200,
        t_end: Some(10.0),
    };
    match e {
        Experiment::Sync => base,
        Experiment::Trapping => Defaults {
            coupling: 2.0,
            frequency: FrequencyKind::Atoms,
            ..base
        },
        Experiment::Contraction => Defaults {
            coupling: 2.0,
            frequency: FrequencyKind::Uniform,
            cells: 32,
            initial: "uniform",
            m_eta: 128,
            t_end: None,
            ..base
        },
        Experiment::Meanfield => Defaults {
            coupling: 2.0,
            frequency: FrequencyKind::Atoms,
            initial: "raised-cosine",
            t_end: Some(1.0),
            ..base
        },
        Experiment::Lemma54 => Defaults {
            frequency: FrequencyKind::Uniform,
            m_eta: 16,
            t_end: None,
            ..base
        },
        Experiment::Crosscheck => Defaults {
            frequency: FrequencyKind::Uniform,
            initial: "raised-cosine",
            diameter: 2.4,
            m_eta: 256,
            t_end: Some(1.0),
            ..base
        },
    }
}

impl ExperimentConfig {
    /// Benchmark configuration of `experiment`.
    pub fn preset(experiment: Experiment) -> Self {
        Self::resolve(RawConfig {
            experiment: Some(experiment),
            ..RawConfig::default()
        })
        .expect("built-in defaults are valid")
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        Self::resolve(raw)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        cfg.resolve_paths(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    /// Initial-data file names are taken relative to the config file.
    fn resolve_paths(&mut self, base: &Path) {
        for source in [&mut self.initial, &mut self.initial_b] {
            if source.ends_with(".csv") && Path::new(source.as_str()).is_relative() {
                *source = base.join(source.as_str()).to_string_lossy().into_owned();
            }
        }
    }

    pub fn resolve(raw: RawConfig) -> Result<Self> {
        let experiment = raw
            .experiment
            .ok_or_else(|| HarnessError::Config("missing key `experiment`".into()))?;
        let d = defaults(experiment);
        let cfg = Self {
            experiment,
            coupling: raw.coupling.unwrap_or(d.coupling),
            frequency: FrequencySpec {
                kind: raw.frequency.unwrap_or(d.frequency),
                radius: raw.frequency_radius.unwrap_or(d.radius),
                cells: raw.frequency_cells.unwrap_or(d.cells),
                atoms: raw.frequency_atoms.unwrap_or(d.atoms),
            },
            initial: raw.initial.unwrap_or_else(|| d.initial.into()),
            initial_b: raw.initial_b.unwrap_or_else(|| d.initial_b.into()),
            diameter: raw.diameter.unwrap_or(d.diameter),
            diameter_b: raw.diameter_b.unwrap_or(d.diameter_b),
            centre: raw.centre.unwrap_or(std::f64::consts::PI),
            centre_b: raw.centre_b.unwrap_or(std::f64::consts::PI),
            shift: raw.shift,
            n: raw.n.unwrap_or(d.n),
            m_theta: raw.m_theta.unwrap_or(d.m_theta),
            m_theta_init: raw.m_theta_init.unwrap_or(4096),
            m_eta: raw.m_eta.unwrap_or(d.m_eta),
            dt: raw.dt.unwrap_or(1e-3),
            t_end: raw.t_end.or(d.t_end),
            sample_every: raw.sample_every.unwrap_or(10),
            window: raw.window.unwrap_or(5.0),
            ladder: raw.ladder.unwrap_or_else(|| vec![32, 64, 128, 256]),
            continuum_m_eta: raw.continuum_m_eta.unwrap_or(2048),
            orders: raw.orders.unwrap_or_else(|| vec![1.0, 2.0, 3.0, 5.0]),
            fields: raw.fields.unwrap_or(1000),
            refinements: raw.refinements.unwrap_or(1),
            series_interval: raw.series_interval.unwrap_or(0.1),
            seed: raw.seed.unwrap_or(0),
            output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from("out")),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(HarnessError::Config(msg.into()));
        if !(self.coupling.is_finite() && self.coupling >= 0.0) {
            return bad("coupling must be finite and non-negative");
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if matches!(self.t_end, Some(t) if !(t >= 0.0 && t.is_finite())) {
            return bad("t_end must be finite and non-negative");
        }
        if self.diameter < 0.0 || self.diameter_b < 0.0 {
            return bad("diameters must be non-negative");
        }
        if self.n == 0 || self.m_theta == 0 || self.m_theta_init == 0 || self.m_eta == 0 {
            return bad("sizes must be positive");
        }
        if self.sample_every == 0 {
            return bad("sample_every must be positive");
        }
        if self.orders.iter().any(|&p| !(p >= 1.0)) {
            return bad("orders must be at least 1");
        }
        if !(self.series_interval > 0.0) {
            return bad("series_interval must be positive");
        }
        Ok(())
    }

    /// `t_end` when configured, else `fallback`.
    pub fn t_end_or(&self, fallback: f64) -> f64 {
        self.t_end.unwrap_or(fallback)
    }
}
