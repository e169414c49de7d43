//! Named initial data.
//!
//! An initial-data name is one of
//! - an ensemble arrangement (`equispaced`, `frequency-sorted`, `random`),
//!   whose continuum counterpart is the uniform profile;
//! - a θ-profile (`uniform`, `raised-cosine`, `tent`, `two-bump`,
//!   `shifted-tent`), optionally prefixed with `comb:`; particle runs use its
//!   stratified Dirac comb;
//! - `dirac`, all mass at the centre;
//! - a path to a grid, ensemble or quantile-field CSV, recognised by the
//!   `kind` in its JSON sidecar.
//!
//! Profiles are supported on `[c − D/2, c + D/2] + s·Ω`, with `s` the
//! configured `shift` (default 0, or 0.4 for `shifted-tent`).

use std::f64::consts::PI;
use std::path::Path;

use kuramoto_core::io::{read_ensemble, read_grid, read_quantile_field, sidecar_path, Sidecar};
use kuramoto_core::{
    dirac_comb_from_density, FrequencyDensity64, GridDensity64, OmegaGrid64, PhaseEnsemble64,
    QuantileField64,
};

use crate::error::{precondition, HarnessError, Result};
use crate::rng::Rng64;

const SHIFTED_TENT_SHIFT: f64 = 0.4;
const GOLDEN: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Uniform,
    RaisedCosine,
    Tent,
    TwoBump,
    ShiftedTent,
}

impl Shape {
    /// Unnormalised profile of the offset `x` from the centre, for half-width `h`.
    fn eval(self, x: f64, h: f64) -> f64 {
        let raised = |x: f64, h: f64| {
            if x.abs() < h {
                0.5 * (1.0 + (PI * x / h).cos())
            } else {
                0.0
            }
        };
        match self {
            Shape::Uniform => f64::from(u8::from(x.abs() <= h)),
            Shape::RaisedCosine => raised(x, h),
            Shape::Tent | Shape::ShiftedTent => (1.0 - x.abs() / h).max(0.0),
            Shape::TwoBump => raised(x + 0.5 * h, 0.5 * h) + raised(x - 0.5 * h, 0.5 * h),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arrangement {
    /// Equally spaced phases; frequencies interleaved across the phases.
    Equispaced,
    /// Equally spaced phases; the fastest oscillators start furthest behind.
    FrequencySorted,
    /// Uniform random phases with both endpoints pinned; i.i.d. frequencies.
    Random,
}

#[derive(Debug, Clone)]
pub enum Initial {
    Profile {
        shape: Shape,
        diameter: f64,
        centre: f64,
        shift: f64,
    },
    Arranged {
        arrangement: Arrangement,
        diameter: f64,
        centre: f64,
    },
    Dirac {
        centre: f64,
    },
    Grid(GridDensity64),
    Ensemble(PhaseEnsemble64),
    Field(QuantileField64),
}

impl Initial {
    /// Parses an initial-data name. A zero diameter yields [`Initial::Dirac`].
    pub fn parse(source: &str, diameter: f64, centre: f64, shift: Option<f64>) -> Result<Self> {
        if source.ends_with(".csv") {
            return Self::load(Path::new(source));
        }
        let name = source.strip_prefix("comb:").unwrap_or(source);
        if name == "dirac" || diameter == 0.0 {
            return Ok(Initial::Dirac { centre });
        }
        if !(diameter > 0.0 && diameter < 2.0 * PI) {
            return Err(HarnessError::Config(format!(
                "diameter {diameter} outside (0, 2pi)"
            )));
        }
        let arrangement = match name {
            "equispaced" => Some(Arrangement::Equispaced),
            "frequency-sorted" => Some(Arrangement::FrequencySorted),
            "random" => Some(Arrangement::Random),
            _ => None,
        };
        if let Some(arrangement) = arrangement {
            if source.starts_with("comb:") {
                return Err(HarnessError::Config(format!("`{source}` is not a profile")));
            }
            return Ok(Initial::Arranged {
                arrangement,
                diameter,
                centre,
            });
        }
        let shape = match name {
            "uniform" => Shape::Uniform,
            "raised-cosine" => Shape::RaisedCosine,
            "tent" => Shape::Tent,
            "two-bump" => Shape::TwoBump,
            "shifted-tent" => Shape::ShiftedTent,
            other => {
                return Err(HarnessError::Config(format!(
                    "unknown initial data `{other}`"
                )))
            }
        };
        let default_shift = if shape == Shape::ShiftedTent {
            SHIFTED_TENT_SHIFT
        } else {
            0.0
        };
        Ok(Initial::Profile {
            shape,
            diameter,
            centre,
            shift: shift.unwrap_or(default_shift),
        })
    }

    fn load(path: &Path) -> Result<Self> {
        let side = sidecar_path(path);
        let text = std::fs::read_to_string(&side)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", side.display())))?;
        let meta: Sidecar = serde_json::from_str(&text)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", side.display())))?;
        match meta.kind.as_str() {
            "grid" => Ok(Initial::Grid(read_grid(path)?)),
            "ensemble" => Ok(Initial::Ensemble(read_ensemble(path)?)),
            "quantile_field" => Ok(Initial::Field(read_quantile_field(path)?)),
            other => Err(HarnessError::Config(format!(
                "{}: unsupported kind `{other}`",
                path.display()
            ))),
        }
    }

    pub fn is_dirac(&self) -> bool {
        matches!(self, Initial::Dirac { .. })
    }

    fn profile(&self) -> Option<(Shape, f64, f64, f64)> {
        match *self {
            Initial::Profile {
                shape,
                diameter,
                centre,
                shift,
            } => Some((shape, diameter, centre, shift)),
            Initial::Arranged {
                diameter, centre, ..
            } => Some((Shape::Uniform, diameter, centre, 0.0)),
            _ => None,
        }
    }

    /// Cell-averaged density on `m_theta` cells over the Ω-grid of `g`.
    pub fn density(&self, g: &FrequencyDensity64, m_theta: usize) -> Result<GridDensity64> {
        if let Some((shape, diameter, centre, shift)) = self.profile() {
            let h = 0.5 * diameter;
            let f = GridDensity64::from_profile(m_theta, g, |th, w| {
                shape.eval(th - centre - shift * w, h)
            })?;
            return Ok(f);
        }
        match self {
            Initial::Grid(f) => {
                same_grid(f.omega(), g.grid())?;
                if f.m_theta() != m_theta {
                    return Err(HarnessError::Config(format!(
                        "grid file has M_theta = {}, run needs {m_theta}",
                        f.m_theta()
                    )));
                }
                Ok(f.clone())
            }
            _ => Err(precondition(
                "initial data has no grid density (use a profile or a grid file)",
            )),
        }
    }

    /// Quantile field with `m_eta` samples per fiber. Profiles are inverted
    /// from a density on `m_theta_init` cells.
    pub fn field(
        &self,
        g: &FrequencyDensity64,
        m_eta: usize,
        m_theta_init: usize,
    ) -> Result<QuantileField64> {
        let q = match self {
            Initial::Dirac { centre } => {
                QuantileField64::new(m_eta, g.grid().clone(), vec![*centre; m_eta * g.grid().len()])?
            }
            Initial::Grid(f) => {
                same_grid(f.omega(), g.grid())?;
                QuantileField64::from_density(f, m_eta)?
            }
            Initial::Ensemble(e) => QuantileField64::from_ensemble(e, g.grid())?,
            Initial::Field(q) => {
                same_grid(q.omega(), g.grid())?;
                if q.m_eta() == m_eta {
                    q.clone()
                } else {
                    q.resampled(m_eta)?
                }
            }
            _ => QuantileField64::from_density(&self.density(g, m_theta_init)?, m_eta)?,
        };
        Ok(q)
    }

    /// `n` oscillators. Profiles give their stratified Dirac comb, built from a
    /// density on `m_theta_init` cells.
    pub fn ensemble(
        &self,
        g: &FrequencyDensity64,
        n: usize,
        m_theta_init: usize,
        rng: &mut Rng64,
    ) -> Result<PhaseEnsemble64> {
        if n == 0 {
            return Err(HarnessError::Config("ensemble needs n >= 1".into()));
        }
        match self {
            Initial::Arranged {
                arrangement,
                diameter,
                centre,
            } => arrange(g, n, *arrangement, *diameter, *centre, rng),
            Initial::Dirac { centre } => arrange(g, n, Arrangement::Equispaced, 0.0, *centre, rng),
            Initial::Ensemble(e) => Ok(e.clone()),
            Initial::Field(q) => Ok(q.to_ensemble()),
            _ => Ok(dirac_comb_from_density(&self.density(g, m_theta_init)?, n)?),
        }
    }
}

fn same_grid(a: &OmegaGrid64, b: &OmegaGrid64) -> Result<()> {
    let close = |x: &[f64], y: &[f64]| {
        x.len() == y.len() && x.iter().zip(y).all(|(u, v)| (u - v).abs() <= 1e-12)
    };
    if close(&a.nodes, &b.nodes) && close(&a.widths, &b.widths) && close(&a.density, &b.density)
    {
        Ok(())
    } else {
        Err(HarnessError::Config(
            "initial data file uses a different frequency grid than the configured g".into(),
        ))
    }
}

/// Inverse CDF of `g` at level `u ∈ [0, 1)`; atoms return their node and
/// cells are uniform inside.
fn frequency_at(g: &FrequencyDensity64, u: f64) -> f64 {
    let grid = g.grid();
    let masses = grid.fiber_masses();
    let total: f64 = masses.iter().sum();
    let target = u * total;
    let mut before = 0.0;
    for k in 0..grid.len() {
        let m = masses[k];
        if target < before + m || k + 1 == grid.len() {
            if g.is_atomic() || m <= 0.0 {
                return grid.nodes[k];
            }
            let frac = ((target - before) / m).clamp(0.0, 1.0);
            return grid.nodes[k] - 0.5 * grid.widths[k] + grid.widths[k] * frac;
        }
        before += m;
    }
    unreachable!("grid is non-empty")
}

/// Stratified frequencies, ascending.
fn stratified_frequencies(g: &FrequencyDensity64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| frequency_at(g, (i as f64 + 0.5) / n as f64))
        .collect()
}

/// Order in which sorted frequencies are dealt to ascending phases so that
/// every phase window sees roughly the law `g`.
fn interleaving(freqs: &[f64], atomic: bool) -> Vec<usize> {
    let n = freqs.len();
    if atomic {
        // round robin proportional to multiplicity
        let mut groups: Vec<(usize, usize)> = Vec::new(); // (start, len)
        for (i, w) in freqs.iter().enumerate() {
            match groups.last_mut() {
                Some((s, l)) if freqs[*s] == *w => *l += 1,
                _ => groups.push((i, 1)),
            }
        }
        let mut used = vec![0usize; groups.len()];
        let mut order = Vec::with_capacity(n);
        for _ in 0..n {
            let (g, _) = groups
                .iter()
                .enumerate()
                .filter(|(gi, (_, len))| used[*gi] < *len)
                .map(|(gi, (_, len))| (gi, (used[gi] as f64 + 0.5) / *len as f64))
                .fold((usize::MAX, f64::INFINITY), |best, cur| {
                    if cur.1 < best.1 {
                        cur
                    } else {
                        best
                    }
                });
            order.push(groups[g].0 + used[g]);
            used[g] += 1;
        }
        order
    } else {
        let keys: Vec<f64> = (0..n).map(|i| ((i + 1) as f64 * GOLDEN).fract()).collect();
        let mut rank: Vec<usize> = (0..n).collect();
        rank.sort_by(|&a, &b| keys[a].total_cmp(&keys[b]));
        let mut order = vec![0; n];
        for (r, &i) in rank.iter().enumerate() {
            order[i] = r;
        }
        order
    }
}

fn arrange(
    g: &FrequencyDensity64,
    n: usize,
    arrangement: Arrangement,
    diameter: f64,
    centre: f64,
    rng: &mut Rng64,
) -> Result<PhaseEnsemble64> {
    let lo = centre - 0.5 * diameter;
    let spacing = if n > 1 { diameter / (n - 1) as f64 } else { 0.0 };
    let line = |i: usize| if n > 1 { lo + spacing * i as f64 } else { centre };
    let freqs = stratified_frequencies(g, n);
    let (theta, omega): (Vec<f64>, Vec<f64>) = match arrangement {
        Arrangement::Equispaced => {
            let order = interleaving(&freqs, g.is_atomic());
            (0..n).map(|i| (line(i), freqs[order[i]])).unzip()
        }
        Arrangement::FrequencySorted => (0..n).map(|i| (line(i), freqs[n - 1 - i])).unzip(),
        Arrangement::Random => (0..n)
            .map(|i| {
                let th = match i {
                    0 => lo,
                    1 if n > 1 => lo + diameter,
                    _ => rng.uniform(lo, lo + diameter),
                };
                (th, frequency_at(g, rng.next_f64()))
            })
            .unzip(),
    };
    Ok(PhaseEnsemble64::new(theta, omega)?)
}
