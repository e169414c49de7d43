//! CSV files with a JSON sidecar (`name.csv` + `name.json`) for grids,
//! ensembles and quantile fields, plus plain CSV tables for time series.
//!
//! Numbers are written with the shortest round-trip representation, so
//! output is byte-for-byte reproducible. Files are written to a temporary
//! name and renamed into place.

use crate::error::{Error, Result};
use crate::measure::{GridDensity, OmegaGrid, PhaseEnsemble, QuantileField};
use crate::particle::TrajectoryRecord;
use crate::scalar::{as_f64, cast, Scalar};
use serde::{Deserialize, Serialize};
use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Metadata stored next to a CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub m_theta: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub m_eta: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n: Option<usize>,
    #[serde(default)]
    pub omega_nodes: Vec<f64>,
    #[serde(default)]
    pub omega_widths: Vec<f64>,
    #[serde(default)]
    pub omega_density: Vec<f64>,
    pub time: f64,
}

impl Sidecar {
    fn with_grid<T: Scalar>(kind: &str, grid: &OmegaGrid<T>, time: T) -> Self {
        let f = |v: &[T]| v.iter().map(|&x| as_f64(x)).collect();
        Self {
            kind: kind.into(),
            m_theta: None,
            m_eta: None,
            n: None,
            omega_nodes: f(&grid.nodes),
            omega_widths: f(&grid.widths),
            omega_density: f(&grid.density),
            time: as_f64(time),
        }
    }

    fn grid<T: Scalar>(&self) -> Result<OmegaGrid<T>> {
        let f = |v: &[f64]| v.iter().map(|&x| cast(x)).collect();
        OmegaGrid::new(
            f(&self.omega_nodes),
            f(&self.omega_widths),
            f(&self.omega_density),
        )
    }

    fn expect_kind(&self, kind: &str) -> Result<()> {
        if self.kind != kind {
            return Err(Error::Parse(format!(
                "sidecar describes a {}, expected a {kind}",
                self.kind
            )));
        }
        Ok(())
    }
}

/// Path of the JSON sidecar belonging to `csv`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("{} has no file name", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    {
        let mut file = fs::File::create(&tmp)?;
        file.write_all(bytes)?;
        file.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Renders a header and rows as CSV text.
pub fn csv_text<R, V>(header: &[&str], rows: R) -> Result<Vec<u8>>
where
    R: IntoIterator<Item = Vec<V>>,
    V: Display,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        if row.len() != header.len() {
            return Err(Error::InvalidParameter(format!(
                "row has {} fields, header has {}",
                row.len(),
                header.len()
            )));
        }
        w.write_record(row.iter().map(|v| v.to_string()))?;
    }
    w.into_inner()
        .map_err(|e| Error::Io(e.to_string()))
}

/// Writes equally long columns as a CSV table.
pub fn write_columns<V: Display + Copy>(path: &Path, header: &[&str], columns: &[&[V]]) -> Result<()> {
    let len = columns.first().map_or(0, |c| c.len());
    if columns.len() != header.len() || columns.iter().any(|c| c.len() != len) {
        return Err(Error::InvalidParameter("ragged columns".into()));
    }
    let rows = (0..len).map(|i| columns.iter().map(|c| c[i]).collect::<Vec<_>>());
    write_atomic(path, &csv_text(header, rows)?)
}

fn write_sidecar(csv: &Path, meta: &Sidecar) -> Result<()> {
    let mut text = serde_json::to_vec_pretty(meta)?;
    text.push(b'\n');
    write_atomic(&sidecar_path(csv), &text)
}

fn read_sidecar(csv: &Path) -> Result<Sidecar> {
    let text = fs::read(sidecar_path(csv))?;
    Ok(serde_json::from_slice(&text)?)
}

fn read_table<T: Scalar>(path: &Path, header: &[&str]) -> Result<Vec<Vec<T>>> {
    let mut r = csv::Reader::from_path(path)?;
    let found: Vec<String> = r.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if found != header {
        return Err(Error::Parse(format!(
            "{}: header {:?}, expected {:?}",
            path.display(),
            found,
            header
        )));
    }
    let mut rows = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|s| {
                s.trim().parse::<T>().map_err(|_| {
                    Error::Parse(format!("{}: row {}: bad number {s:?}", path.display(), line + 1))
                })
            })
            .collect::<Result<Vec<T>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub const GRID_HEADER: [&str; 3] = ["theta", "omega", "f"];
pub const ENSEMBLE_HEADER: [&str; 2] = ["theta", "omega"];
pub const FIELD_HEADER: [&str; 3] = ["eta_fraction", "omega", "phi"];
pub const TRAJECTORY_HEADER: [&str; 4] = ["t", "D_theta", "r", "theta_c"];

/// One row per cell `(θ_m, Ω_k, f)`, fiber-major.
pub fn write_grid<T: Scalar>(path: &Path, f: &GridDensity<T>) -> Result<()> {
    let theta = f.theta_grid();
    let mt = f.m_theta();
    let rows = (0..f.values().len()).map(|i| vec![theta[i % mt], f.omega().nodes[i / mt], f.values()[i]]);
    write_atomic(path, &csv_text(&GRID_HEADER, rows)?)?;
    let mut meta = Sidecar::with_grid("grid", f.omega(), f.time);
    meta.m_theta = Some(mt);
    write_sidecar(path, &meta)
}

pub fn read_grid<T: Scalar>(path: &Path) -> Result<GridDensity<T>> {
    let meta = read_sidecar(path)?;
    meta.expect_kind("grid")?;
    let grid = meta.grid::<T>()?;
    let mt = meta
        .m_theta
        .ok_or_else(|| Error::Parse("grid sidecar lacks m_theta".into()))?;
    let rows = read_table::<T>(path, &GRID_HEADER)?;
    if rows.len() != mt * grid.len() {
        return Err(Error::Parse(format!(
            "{} rows for a {mt} x {} grid",
            rows.len(),
            grid.len()
        )));
    }
    let values = rows.into_iter().map(|r| r[2]).collect();
    let mut f = GridDensity::new(mt, grid, values)?;
    f.time = cast(meta.time);
    Ok(f)
}

/// One row per oscillator with the phase reduced to `[0, 2π)`.
pub fn write_ensemble<T: Scalar>(path: &Path, e: &PhaseEnsemble<T>) -> Result<()> {
    let w = e.wrapped();
    let rows = (0..w.len()).map(|i| vec![w.theta[i], w.omega[i]]);
    write_atomic(path, &csv_text(&ENSEMBLE_HEADER, rows)?)?;
    let meta = Sidecar {
        kind: "ensemble".into(),
        m_theta: None,
        m_eta: None,
        n: Some(e.len()),
        omega_nodes: Vec::new(),
        omega_widths: Vec::new(),
        omega_density: Vec::new(),
        time: as_f64(e.time),
    };
    write_sidecar(path, &meta)
}

pub fn read_ensemble<T: Scalar>(path: &Path) -> Result<PhaseEnsemble<T>> {
    let rows = read_table::<T>(path, &ENSEMBLE_HEADER)?;
    let (theta, omega) = rows.into_iter().map(|r| (r[0], r[1])).unzip();
    let mut e = PhaseEnsemble::new(theta, omega)?;
    let meta_path = sidecar_path(path);
    if meta_path.exists() {
        let meta = read_sidecar(path)?;
        meta.expect_kind("ensemble")?;
        e.time = cast(meta.time);
    }
    Ok(e)
}

/// One row per sample `(s_j, Ω_k, φ_{j,k})`, fiber-major.
pub fn write_quantile_field<T: Scalar>(path: &Path, q: &QuantileField<T>) -> Result<()> {
    let m = q.m_eta();
    let rows = (0..q.phi().len()).map(|i| vec![q.fractions()[i % m], q.omega().nodes[i / m], q.phi()[i]]);
    write_atomic(path, &csv_text(&FIELD_HEADER, rows)?)?;
    let mut meta = Sidecar::with_grid("quantile_field", q.omega(), q.time);
    meta.m_eta = Some(m);
    write_sidecar(path, &meta)
}

pub fn read_quantile_field<T: Scalar>(path: &Path) -> Result<QuantileField<T>> {
    let meta = read_sidecar(path)?;
    meta.expect_kind("quantile_field")?;
    let grid = meta.grid::<T>()?;
    let m = meta
        .m_eta
        .ok_or_else(|| Error::Parse("field sidecar lacks m_eta".into()))?;
    let rows = read_table::<T>(path, &FIELD_HEADER)?;
    let phi = rows.into_iter().map(|r| r[2]).collect();
    let mut q = QuantileField::new(m, grid, phi)?;
    q.time = cast(meta.time);
    Ok(q)
}

/// `t, D_theta, r, theta_c` per sample.
pub fn write_trajectory<T: Scalar>(path: &Path, rec: &TrajectoryRecord<T>) -> Result<()> {
    write_columns(
        path,
        &TRAJECTORY_HEADER,
        &[&rec.times, &rec.diameters, &rec.order_param, &rec.mean_phase],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::FrequencyDensity;

    #[test]
    fn grid_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let g = FrequencyDensity::<f64>::tent(0.5, 3).unwrap();
        let mut f = GridDensity::from_profile(8, &g, |th, w| 1.0 + 0.3 * th.sin() + w).unwrap();
        f.time = 0.25;
        write_grid(&path, &f).unwrap();
        assert_eq!(read_grid::<f64>(&path).unwrap(), f);
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("theta,omega,f\n"));
        assert!(!dir.path().join(".f.csv.tmp").exists());
    }

    #[test]
    fn field_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("q.csv");
        let g = FrequencyDensity::<f64>::uniform(0.5, 2).unwrap();
        let q = QuantileField::new(3, g.grid().clone(), vec![1.0, 1.5, 2.0, 1.1, 1.2, 1.3]).unwrap();
        write_quantile_field(&path, &q).unwrap();
        assert_eq!(read_quantile_field::<f64>(&path).unwrap(), q);
        assert!(read_grid::<f64>(&path).is_err());
    }

    #[test]
    fn ensemble_is_wrapped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.csv");
        let e = PhaseEnsemble::from_parts(vec![7.0, 1.0], vec![0.5, -0.5], 2.0);
        write_ensemble(&path, &e).unwrap();
        let back = read_ensemble::<f64>(&path).unwrap();
        assert!((back.theta[0] - (7.0 - 2.0 * std::f64::consts::PI)).abs() < 1e-15);
        assert_eq!(back.time, 2.0);
    }

    #[test]
    fn header_is_checked() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(matches!(read_ensemble::<f64>(&path), Err(Error::Parse(_))));
    }
}
