//! Identical oscillators: the phase diameter stays inside
//! `[D0 e^{−Kt}, D0 e^{−Kαt}]` with `α = sin D0 / D0`.

use std::f64::consts::PI;

use kuramoto_core::io::write_trajectory;
use kuramoto_core::metrics::{bl_distance_upper, fit_decay_rate};
use kuramoto_core::{evolve, field_diameter, simulate, KineticParams, ParticleParams};

use super::{centre_ensemble, centre_field, conservation_checks, sample_spread};
use crate::config::ExperimentConfig;
use crate::error::{precondition, Result};
use crate::presets::Initial;
use crate::report::{Output, Report};
use crate::rng::Rng64;

const ENVELOPE_SLACK: f64 = 1e-6;

fn alpha(d0: f64) -> f64 {
    if d0 > 0.0 {
        d0.sin() / d0
    } else {
        1.0
    }
}

/// Lower and upper envelopes at `times`.
fn envelopes(d0: f64, coupling: f64, times: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let a = alpha(d0);
    times
        .iter()
        .map(|&t| (d0 * (-coupling * t).exp(), d0 * (-coupling * a * t).exp()))
        .unzip()
}

fn contained(d: &[f64], lower: &[f64], upper: &[f64]) -> (bool, f64) {
    let mut worst: f64 = 0.0;
    for i in 0..d.len() {
        worst = worst
            .max(lower[i] - d[i])
            .max(d[i] - upper[i]);
    }
    (worst <= ENVELOPE_SLACK, worst)
}

/// Decay rate fitted on the second half of the run; `None` when the series
/// reaches zero there.
fn late_rate(times: &[f64], values: &[f64], t_end: f64) -> Option<f64> {
    fit_decay_rate(times, values, (0.5 * t_end, t_end))
        .ok()
        .map(|f| f.rate)
}

pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    let mut report = Report::new(cfg);
    let g = cfg.frequency.build()?;
    if !(g.grid().len() == 1 && g.grid().nodes[0] == 0.0) {
        return Err(precondition("sync needs identical oscillators (frequency = \"identical\")"));
    }
    let t_end = cfg.t_end_or(10.0);
    let coupling = cfg.coupling;
    let initial = Initial::parse(&cfg.initial, cfg.diameter, cfg.centre, cfg.shift)?;
    let mut rng = Rng64::new(cfg.seed);

    let e0 = initial.ensemble(&g, cfg.n, cfg.m_theta_init, &mut rng.split())?;
    let e0 = centre_ensemble(e0, "particles", &mut report)?;
    let d0 = kuramoto_core::phase_diameter(&e0);
    if d0 >= PI {
        return Err(precondition(format!("initial diameter {d0} is not below pi")));
    }
    let params = ParticleParams::new(coupling, cfg.dt, t_end)?;
    let rec = simulate(&e0, &params, cfg.sample_every)?;
    let (lower, upper) = envelopes(d0, coupling, &rec.times);
    let (ok, worst) = contained(&rec.diameters, &lower, &upper);
    report.check(
        "particle_envelope",
        ok,
        format!("max excursion outside the envelope {worst:.3e} (slack {ENVELOPE_SLACK:e})"),
    );
    let bl: Vec<f64> = rec.snapshots.iter().map(|e| bl_distance_upper(e, PI)).collect();

    let q0 = initial.field(&g, cfg.m_eta, cfg.m_theta_init)?;
    let q0 = centre_field(q0, "quantile field", &mut report)?;
    let traj = evolve(&q0, &KineticParams::new(coupling, cfg.dt, t_end)?, cfg.sample_every)?;
    let qt = traj.times();
    let spread: Vec<f64> = traj.snapshots.iter().map(sample_spread).collect();
    let field_d: Vec<f64> = traj.snapshots.iter().map(field_diameter).collect();
    let (q_lower, q_upper) = envelopes(spread[0], coupling, &qt);
    let (q_ok, q_worst) = contained(&spread, &q_lower, &q_upper);
    report.check(
        "quantile_envelope",
        q_ok,
        format!("sample spread outside its envelope by {q_worst:.3e}"),
    );
    conservation_checks("quantile", &traj.snapshots, &mut report);
    let q_bl: Vec<f64> = traj.snapshots.iter().map(|q| bl_distance_upper(q, PI)).collect();
    let q_mean = traj.theta_means();

    let rate = late_rate(&rec.times, &rec.diameters, t_end);
    report.set("initial_diameter", d0);
    report.set("alpha", alpha(d0));
    report.set("final_diameter", *rec.diameters.last().unwrap());
    report.set("final_bl_upper", *bl.last().unwrap());
    report.set("final_order_parameter", *rec.order_param.last().unwrap());
    report.set("fitted_rate", rate);
    report.set("quantile_fitted_rate", late_rate(&qt, &spread, t_end));
    if rate.is_none() {
        report.note("diameter series is not positive on the fit window; no rate fitted");
    }

    let mut out = Output::create(&cfg.output_dir)?;
    let path = out.file("trajectory.csv");
    write_trajectory(&path, &rec)?;
    out.columns(
        "envelope.csv",
        &["t", "D_theta", "lower", "upper", "bl_upper"],
        &[&rec.times, &rec.diameters, &lower, &upper, &bl],
    )?;
    out.columns(
        "quantile.csv",
        &["t", "D_theta", "D_theta_extrapolated", "lower", "upper", "theta_mean", "bl_upper"],
        &[&qt, &spread, &field_d, &q_lower, &q_upper, &q_mean, &q_bl],
    )?;
    out.finish(&mut report)?;
    Ok(report)
}
