//! Exponential contraction of `W̃_p` between two kinetic solutions with the
//! same frequency law.
//!
//! Hypotheses, checked on the mean-translated data:
//! `0 < D(ν0) ≤ D(μ0) < π` and `K > D_Ω max{1/sin D(μ0), 1/sin D(ν0)}`.
//! The bound `W̃_p(t) ≤ W̃_p(t_ref) e^{−λ(t − t_ref)}`, `λ = 2K cos D∞ / π`,
//! is checked from the first sample `t_ref ≥ t0` to `t0 + window`.

use std::f64::consts::PI;

use kuramoto_core::io::write_quantile_field;
use kuramoto_core::metrics::{fit_decay_rate, modified_wp};
use kuramoto_core::{evolve, field_diameter, KineticParams};
use rayon::prelude::*;

use super::{centre_field, conservation_checks, trapping_times};
use crate::config::ExperimentConfig;
use crate::error::{precondition, Result};
use crate::presets::Initial;
use crate::report::{Output, Report};

const BOUND_FACTOR: f64 = 1.0 + 1e-3;
const RATE_MARGIN: f64 = 0.05;
const ORDERS: [(f64, &str); 3] = [(1.0, "W1"), (2.0, "W2"), (f64::INFINITY, "Winf")];

pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    let mut report = Report::new(cfg);
    let g = cfg.frequency.build()?;
    let mu_source = Initial::parse(&cfg.initial, cfg.diameter, cfg.centre, cfg.shift)?;
    let nu_source = Initial::parse(&cfg.initial_b, cfg.diameter_b, cfg.centre_b, cfg.shift)?;
    let mu0 = mu_source.field(&g, cfg.m_eta, cfg.m_theta_init)?;
    let nu0 = nu_source.field(&g, cfg.m_eta, cfg.m_theta_init)?;
    let mut mu0 = centre_field(mu0, "mu0", &mut report)?;
    let mut nu0 = centre_field(nu0, "nu0", &mut report)?;
    let (mut d_mu, mut d_nu) = (field_diameter(&mu0), field_diameter(&nu0));
    if d_nu > d_mu {
        std::mem::swap(&mut mu0, &mut nu0);
        std::mem::swap(&mut d_mu, &mut d_nu);
        report.note("swapped the pair so that mu0 has the larger diameter (the distance is symmetric)");
    }
    if !(d_nu > 0.0 && d_mu < PI) {
        return Err(precondition(format!(
            "diameters must satisfy 0 < D(nu0) <= D(mu0) < pi, got D(nu0) = {d_nu}, D(mu0) = {d_mu}"
        )));
    }
    let d_omega = g.support_diameter();
    let threshold = d_omega * (1.0 / d_mu.sin()).max(1.0 / d_nu.sin());
    if !(cfg.coupling > threshold) {
        return Err(precondition(format!(
            "coupling {} does not exceed D_Omega max(1/sin D(mu0), 1/sin D(nu0)) = {threshold}",
            cfg.coupling
        )));
    }
    let (d_inf, t0) = trapping_times(d_mu, d_omega, cfg.coupling)?;
    let rate_bound = 2.0 * cfg.coupling * d_inf.cos() / PI;
    let horizon = t0 + cfg.window;
    let t_end = cfg.t_end_or(horizon);
    let params = KineticParams::new(cfg.coupling, cfg.dt, t_end)?;

    let (mu_run, nu_run) = rayon::join(
        || evolve(&mu0, &params, cfg.sample_every),
        || evolve(&nu0, &params, cfg.sample_every),
    );
    let (mu, nu) = (mu_run?, nu_run?);
    conservation_checks("mu", &mu.snapshots, &mut report);
    conservation_checks("nu", &nu.snapshots, &mut report);
    let times = mu.times();

    let dist: Vec<Vec<f64>> = ORDERS
        .iter()
        .map(|&(p, _)| {
            mu.snapshots
                .par_iter()
                .zip(&nu.snapshots)
                .map(|(a, b)| modified_wp(a, b, p))
                .collect::<std::result::Result<Vec<f64>, _>>()
        })
        .collect::<std::result::Result<_, _>>()?;

    let Some(r) = times.iter().position(|&t| t >= t0) else {
        return Err(precondition(format!("run ends at {t_end}, before t0 = {t0}")));
    };
    let t_ref = times[r];
    let window: Vec<usize> = (r + 1..times.len()).filter(|&i| times[i] <= horizon + 1e-12).collect();
    if window.is_empty() {
        return Err(precondition(format!("no samples in (t0, t0 + window] = ({t0}, {horizon}]")));
    }
    let mut bounds = Vec::new();
    let mut fits = serde_json::Map::new();
    for (series, &(_, name)) in dist.iter().zip(&ORDERS) {
        let bound: Vec<f64> = times
            .iter()
            .map(|&t| series[r] * (-rate_bound * (t - t_ref)).exp())
            .collect();
        let worst = window
            .iter()
            .map(|&i| if bound[i] > 0.0 { series[i] / bound[i] } else if series[i] > 0.0 { f64::INFINITY } else { 0.0 })
            .fold(0.0, f64::max);
        report.check(
            &format!("{name}_bound"),
            worst <= BOUND_FACTOR,
            format!("max W/bound over the window = {worst:.6} (limit {BOUND_FACTOR})"),
        );
        if series.iter().all(|&v| v == 0.0) {
            report.note(format!("{name} is identically zero; no rate fitted"));
            fits.insert(name.into(), serde_json::Value::Null);
        } else {
            let fit = fit_decay_rate(&times, series, (t_ref, horizon))?;
            report.check(
                &format!("{name}_rate"),
                fit.rate >= (1.0 - RATE_MARGIN) * rate_bound,
                format!(
                    "fitted rate {:.4} against bound {rate_bound:.4} (R^2 = {:.4})",
                    fit.rate, fit.r_squared
                ),
            );
            fits.insert(name.into(), serde_json::json!({"rate": fit.rate, "r_squared": fit.r_squared}));
        }
        bounds.push(bound);
    }

    report.set("d_mu0", d_mu);
    report.set("d_nu0", d_nu);
    report.set("d_omega", d_omega);
    report.set("coupling_threshold", threshold);
    report.set("d_inf", d_inf);
    report.set("t0", t0);
    report.set("t_ref", t_ref);
    report.set("rate_bound", rate_bound);
    report.set("fits", fits);

    let mut out = Output::create(&cfg.output_dir)?;
    out.columns(
        "distances.csv",
        &["t", "W1", "W2", "Winf", "bound_W1", "bound_W2", "bound_Winf"],
        &[&times, &dist[0], &dist[1], &dist[2], &bounds[0], &bounds[1], &bounds[2]],
    )?;
    let dm: Vec<f64> = mu.diameters();
    let dn: Vec<f64> = nu.diameters();
    out.columns(
        "diameters.csv",
        &["t", "D_mu", "D_nu", "theta_mean_mu", "theta_mean_nu"],
        &[&times, &dm, &dn, &mu.theta_means(), &nu.theta_means()],
    )?;
    let p = out.file("mu_final.csv");
    write_quantile_field(&p, mu.last())?;
    out.file("mu_final.json");
    let p = out.file("nu_final.csv");
    write_quantile_field(&p, nu.last())?;
    out.file("nu_final.json");
    out.finish(&mut report)?;
    Ok(report)
}
