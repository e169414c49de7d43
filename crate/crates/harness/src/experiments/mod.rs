//! The verification experiments. Each one validates its hypotheses, runs,
//! writes CSV series plus `report.json` into the output directory and
//! returns the report.

use std::f64::consts::PI;

use kuramoto_core::{PhaseEnsemble64, QuantileField64};

use crate::config::{Experiment, ExperimentConfig};
use crate::error::Result;
use crate::report::Report;

pub mod contraction;
pub mod crosscheck;
pub mod lemma54;
pub mod meanfield;
pub mod sync;
pub mod trapping;

pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    match cfg.experiment {
        Experiment::Sync => sync::run(cfg),
        Experiment::Trapping => trapping::run(cfg),
        Experiment::Contraction => contraction::run(cfg),
        Experiment::Meanfield => meanfield::run(cfg),
        Experiment::Lemma54 => lemma54::run(cfg),
        Experiment::Crosscheck => crosscheck::run(cfg),
    }
}

/// Mean translations smaller than this are skipped.
const MEAN_SNAP: f64 = 1e-13;

/// Shifts all phases so that the mean is π, logging the shift.
pub(crate) fn centre_ensemble(
    e: PhaseEnsemble64,
    label: &str,
    report: &mut Report,
) -> Result<PhaseEnsemble64> {
    let shift = PI - e.mean_phase();
    if shift.abs() <= MEAN_SNAP {
        return Ok(e);
    }
    report.note(format!("{label}: translated phases by {shift:+.6e} to put the mean at pi"));
    let theta = e.theta.iter().map(|t| t + shift).collect();
    let mut out = PhaseEnsemble64::new(theta, e.omega.clone())?;
    out.time = e.time;
    Ok(out)
}

pub(crate) fn centre_field(
    q: QuantileField64,
    label: &str,
    report: &mut Report,
) -> Result<QuantileField64> {
    let shift = PI - q.theta_mean();
    if shift.abs() <= MEAN_SNAP {
        return Ok(q);
    }
    report.note(format!("{label}: translated phases by {shift:+.6e} to put the mean at pi"));
    Ok(q.translated(shift)?)
}

/// Spread of the quantile samples themselves (no endpoint extrapolation).
pub(crate) fn sample_spread(q: &QuantileField64) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in q.occupied_fibers() {
        let col = q.column(k);
        lo = lo.min(col[0]);
        hi = hi.max(col[col.len() - 1]);
    }
    if lo > hi {
        0.0
    } else {
        hi - lo
    }
}

/// Conservation along a quantile trajectory: θ-mean drift at most `1e-9·t`,
/// bit-identical total weight and Ω-mean within `1e-12`.
pub(crate) fn conservation_checks(label: &str, snaps: &[QuantileField64], report: &mut Report) {
    let first = &snaps[0];
    let (m0, w0, t0) = (first.theta_mean(), first.total_weight(), first.time);
    let mut worst_ratio: f64 = 0.0;
    let mut drift_ok = true;
    let mut mass_ok = true;
    let mut omega_worst: f64 = 0.0;
    for q in snaps {
        let drift = (q.theta_mean() - m0).abs();
        let elapsed = q.time - t0;
        if drift > 1e-9 * elapsed {
            drift_ok = false;
        }
        if elapsed > 0.0 {
            worst_ratio = worst_ratio.max(drift / elapsed);
        }
        mass_ok &= q.total_weight() == w0;
        omega_worst = omega_worst.max(q.omega_mean().abs());
    }
    report.check(
        &format!("{label}_theta_mean_drift"),
        drift_ok,
        format!("max drift/t = {worst_ratio:.3e} (limit 1e-9)"),
    );
    report.check(
        &format!("{label}_mass_static"),
        mass_ok,
        format!("total weight {w0:.17} at every sample"),
    );
    report.check(
        &format!("{label}_omega_mean"),
        omega_worst <= 1e-12,
        format!("max |omega mean| = {omega_worst:.3e} (limit 1e-12)"),
    );
}

/// `D∞ = arcsin(D_Ω/K)` and the entry time `t0 = (D0 − D∞)/(K sin D0 − D_Ω)`
/// (zero when already inside). Requires `K sin D0 > D_Ω`.
pub(crate) fn trapping_times(d0: f64, d_omega: f64, coupling: f64) -> Result<(f64, f64)> {
    if d_omega > 0.0 {
        let est = kuramoto_core::trapping_estimates(d0, d_omega, coupling)
            .map_err(|e| crate::error::precondition(e.to_string()))?;
        return Ok((est.d_inf, est.t0));
    }
    if !(0.0..PI).contains(&d0) {
        return Err(crate::error::precondition(format!(
            "initial phase diameter {d0} outside [0, pi)"
        )));
    }
    if d0 == 0.0 {
        return Ok((0.0, 0.0));
    }
    if !(coupling > 0.0) {
        return Err(crate::error::precondition("coupling must be positive"));
    }
    Ok((0.0, d0 / (coupling * d0.sin())))
}


pub(crate) fn fmt_list(xs: &[f64]) -> String {
    let items: Vec<String> = xs.iter().map(|x| format!("{x:.4e}")).collect();
    format!("[{}]", items.join(", "))
}
