//! Non-identical oscillators: `D_θ(t) ≤ D0` throughout and
//! `D_θ(t) ≤ D∞ + 1e-3` once `t ≥ t0`, with `(D∞, t0)` from the trapping
//! estimates.

use kuramoto_core::io::write_trajectory;
use kuramoto_core::{freq_diameter, phase_diameter, simulate, ParticleParams};

use super::trapping_times;
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::presets::Initial;
use crate::report::{Output, Report};
use crate::rng::Rng64;

pub const TRAP_SLACK: f64 = 1e-3;

/// Time for `D' = D_Ω − K sin D` to fall from `d0` to `D∞ + eps`; the
/// particle diameter obeys this with `≤`, so it bounds the entry time.
///
/// Integrates `dt = dD / (K sin D − D_Ω)` in `u = ln(D − D∞)` by Simpson's
/// rule. Needs `K sin D > D_Ω` on `(D∞, d0]`, which holds when
/// `K sin d0 > D_Ω`.
pub fn comparison_entry_time(d0: f64, d_omega: f64, coupling: f64, eps: f64) -> f64 {
    let d_inf = (d_omega / coupling).asin();
    if d0 <= d_inf + eps {
        return 0.0;
    }
    let (a, b) = (eps.ln(), (d0 - d_inf).ln());
    let n = 4096;
    let h = (b - a) / n as f64;
    let f = |u: f64| {
        let x = u.exp();
        x / (coupling * (d_inf + x).sin() - d_omega)
    };
    let inner: f64 = (1..n)
        .map(|i| f(a + h * i as f64) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    h / 3.0 * (f(a) + inner + f(b))
}

pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    let mut report = Report::new(cfg);
    let g = cfg.frequency.build()?;
    let initial = Initial::parse(&cfg.initial, cfg.diameter, cfg.centre, cfg.shift)?;
    let mut rng = Rng64::new(cfg.seed);
    let e0 = initial.ensemble(&g, cfg.n, cfg.m_theta_init, &mut rng.split())?;
    let d0 = phase_diameter(&e0);
    let d_omega = freq_diameter(&e0);
    let (d_inf, t0) = trapping_times(d0, d_omega, cfg.coupling)?;
    let t_end = cfg.t_end_or(10.0);
    if t_end < t0 {
        report.note(format!("t_end = {t_end} ends before t0 = {t0}; the trapped phase is not observed"));
    }

    let rec = simulate(&e0, &ParticleParams::new(cfg.coupling, cfg.dt, t_end)?, cfg.sample_every)?;
    let max_d = rec.diameters.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    report.check(
        "diameter_never_exceeds_initial",
        max_d <= d0,
        format!("max D = {max_d:.12}, D0 = {d0:.12}"),
    );
    let limit = d_inf + TRAP_SLACK;
    let late: Vec<(f64, f64)> = rec
        .times
        .iter()
        .zip(&rec.diameters)
        .filter(|(t, _)| **t >= t0)
        .map(|(&t, &d)| (t, d))
        .collect();
    let late_max = late.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let first_late = late.first().copied();
    report.check(
        "trapped_after_t0",
        late.iter().all(|&(_, d)| d <= limit),
        match first_late {
            Some((t, d)) => format!(
                "max D over t >= t0 is {late_max:.6} against D_inf + 1e-3 = {limit:.6}; D({t:.3}) = {d:.6}"
            ),
            None => "no samples after t0".into(),
        },
    );
    // first sample after which the diameter stays below the limit
    let entry = (0..rec.times.len())
        .find(|&i| rec.diameters[i..].iter().all(|&d| d <= limit))
        .map(|i| rec.times[i]);

    report.set("d0", d0);
    report.set("d_omega", d_omega);
    report.set("d_inf", d_inf);
    report.set("t0", t0);
    report.set(
        "comparison_entry_time",
        if d_omega > 0.0 { Some(comparison_entry_time(d0, d_omega, cfg.coupling, TRAP_SLACK)) } else { None },
    );
    report.set("max_diameter_after_t0", if late.is_empty() { None } else { Some(late_max) });
    report.set("diameter_at_t0", first_late.map(|p| p.1));
    report.set("observed_entry_time", entry);
    report.set("final_diameter", *rec.diameters.last().unwrap());

    let mut out = Output::create(&cfg.output_dir)?;
    let path = out.file("trajectory.csv");
    write_trajectory(&path, &rec)?;
    let n = rec.times.len();
    out.columns(
        "trapping.csv",
        &["t", "D_theta", "D_inf", "D_0", "t0"],
        &[&rec.times, &rec.diameters, &vec![d_inf; n], &vec![d0; n], &vec![t0; n]],
    )?;
    out.finish(&mut report)?;
    Ok(report)
}
