//! Quantile solver against the finite-volume solver on the same initial
//! density, at a reference resolution and under repeated doubling of both
//! `M_θ` and `M_η`.

use kuramoto_core::io::{write_grid, write_quantile_field};
use kuramoto_core::metrics::modified_wp;
use kuramoto_core::{evolve, fv_simulate, GridDensity64, KineticParams, QuantileField64};
use rayon::prelude::*;

use super::{conservation_checks, fmt_list};
use crate::config::ExperimentConfig;
use crate::error::{precondition, HarnessError, Result};
use crate::presets::Initial;
use crate::report::{Output, Report};

pub const REFERENCE_LIMIT: f64 = 5e-2;

struct Level {
    m_theta: usize,
    m_eta: usize,
    series: Vec<f64>,
    fv_final: GridDensity64,
    snapshots: Vec<QuantileField64>,
}

pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    let mut report = Report::new(cfg);
    let g = cfg.frequency.build()?;
    let initial = Initial::parse(&cfg.initial, cfg.diameter, cfg.centre, cfg.shift)?;
    if !matches!(initial, Initial::Profile { .. } | Initial::Grid(_)) {
        return Err(precondition("crosscheck needs a smooth initial density (a profile or a grid file)"));
    }
    if cfg.refinements > 0 && matches!(initial, Initial::Grid(_)) {
        return Err(HarnessError::Config("a grid file cannot be refined; set refinements = 0".into()));
    }
    let t_end = cfg.t_end_or(1.0);
    let segments = (t_end / cfg.series_interval).round() as usize;
    if segments == 0 || (segments as f64 * cfg.series_interval - t_end).abs() > 1e-9 {
        return Err(HarnessError::Config("t_end must be a positive multiple of series_interval".into()));
    }
    let interval = t_end / segments as f64;
    let params = KineticParams::new(cfg.coupling, cfg.dt, interval)?;

    let levels: Vec<Level> = (0..=cfg.refinements)
        .into_par_iter()
        .map(|r| -> Result<Level> {
            let (m_theta, m_eta) = (cfg.m_theta << r, cfg.m_eta << r);
            let mut f = initial.density(&g, m_theta)?;
            let mut q = initial.field(&g, m_eta, cfg.m_theta_init)?;
            let distance = |f: &GridDensity64, q: &QuantileField64| -> Result<f64> {
                let from_fv = QuantileField64::from_density(f, m_eta)?;
                Ok(modified_wp(&from_fv, q, 1.0)?)
            };
            let mut series = vec![distance(&f, &q)?];
            let mut snapshots = vec![q.clone()];
            for _ in 0..segments {
                f = fv_simulate(&f, cfg.coupling, interval, usize::MAX)?
                    .pop()
                    .expect("at least the initial snapshot");
                q = evolve(&q, &params, usize::MAX)?.last().clone();
                series.push(distance(&f, &q)?);
                snapshots.push(q.clone());
            }
            Ok(Level {
                m_theta,
                m_eta,
                series,
                fv_final: f,
                snapshots,
            })
        })
        .collect::<Result<_>>()?;

    let finals: Vec<f64> = levels.iter().map(|l| *l.series.last().unwrap()).collect();
    report.check(
        "reference_agreement",
        finals[0] <= REFERENCE_LIMIT,
        format!(
            "W1 at t_end = {:.4e} at (M_theta, M_eta) = ({}, {}), limit {REFERENCE_LIMIT:e}",
            finals[0], levels[0].m_theta, levels[0].m_eta
        ),
    );
    if levels.len() > 1 {
        report.check(
            "decreasing_under_refinement",
            finals.windows(2).all(|w| w[1] < w[0]),
            format!("W1 at t_end per level: {}", fmt_list(&finals)),
        );
    }
    for l in &levels {
        conservation_checks(&format!("quantile_{}", l.m_eta), &l.snapshots, &mut report);
    }

    report.set("resolutions", levels.iter().map(|l| (l.m_theta, l.m_eta)).collect::<Vec<_>>());
    report.set("w1_t_end", &finals);
    let mut out = Output::create(&cfg.output_dir)?;
    let times: Vec<f64> = (0..=segments).map(|i| i as f64 * interval).collect();
    let names: Vec<String> = levels.iter().map(|l| format!("W1_{}_{}", l.m_theta, l.m_eta)).collect();
    let mut header = vec!["t"];
    header.extend(names.iter().map(String::as_str));
    let mut columns: Vec<&[f64]> = vec![&times];
    columns.extend(levels.iter().map(|l| l.series.as_slice()));
    out.columns("series.csv", &header, &columns)?;
    let mt: Vec<f64> = levels.iter().map(|l| l.m_theta as f64).collect();
    let me: Vec<f64> = levels.iter().map(|l| l.m_eta as f64).collect();
    out.columns("crosscheck.csv", &["m_theta", "m_eta", "w1_t_end"], &[&mt, &me, &finals])?;
    let p = out.file("fv_final.csv");
    write_grid(&p, &levels[0].fv_final)?;
    out.file("fv_final.json");
    let p = out.file("quantile_final.csv");
    write_quantile_field(&p, levels[0].snapshots.last().unwrap())?;
    out.file("quantile_final.json");
    out.finish(&mut report)?;
    Ok(report)
}
