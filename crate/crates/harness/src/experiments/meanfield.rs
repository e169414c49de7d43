//! Self-convergence of Dirac-comb particle solutions.
//!
//! For every `N` on the ladder the comb of the initial density is evolved
//! to `t_end`. Reported: `W1` between the `N`-comb (each atom split in two)
//! and the `2N`-comb, and `W̃₁` between the quantile field induced by each
//! comb and the continuum quantile solution.

use kuramoto_core::io::write_ensemble;
use kuramoto_core::metrics::{modified_wp, w1_empirical};
use kuramoto_core::{
    evolve, simulate, EmpiricalMeasure64, FrequencyDensity64, KineticParams, ParticleParams,
    PhaseEnsemble64, QuantileField64,
};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::error::{precondition, Result};
use crate::presets::Initial;
use crate::report::{Output, Report};
use crate::rng::Rng64;

/// Tolerance for the free-streaming isometry at `K = 0`.
const ISOMETRY_TOL: f64 = 1e-12;

/// Per-fiber counts of an `n`-comb, if they are whole numbers.
fn fiber_counts(g: &FrequencyDensity64, n: usize) -> Option<Vec<usize>> {
    g.grid()
        .fiber_masses()
        .iter()
        .map(|&m| {
            let c = m * n as f64;
            let r = c.round();
            ((c - r).abs() < 1e-9 && r >= 1.0).then_some(r as usize)
        })
        .collect()
}

/// Repeats every sample `factor` times: the same step quantile function on a
/// finer lattice.
fn replicated(q: &QuantileField64, factor: usize) -> Result<QuantileField64> {
    let phi = q
        .phi()
        .iter()
        .flat_map(|&v| std::iter::repeat_n(v, factor))
        .collect();
    let mut out = QuantileField64::new(q.m_eta() * factor, q.omega().clone(), phi)?;
    out.time = q.time;
    Ok(out)
}

struct Rung {
    n: usize,
    start: PhaseEnsemble64,
    end: PhaseEnsemble64,
}

fn w1_refined(coarse: &PhaseEnsemble64, fine: &PhaseEnsemble64) -> Result<f64> {
    let a = EmpiricalMeasure64::from_ensemble(coarse).refined(fine.len() / coarse.len());
    let b = EmpiricalMeasure64::from_ensemble(fine);
    Ok(w1_empirical(&a, &b)?)
}

fn field_distance(
    e: &PhaseEnsemble64,
    g: &FrequencyDensity64,
    continuum: &QuantileField64,
) -> Result<f64> {
    let q = QuantileField64::from_ensemble(e, g.grid())?;
    let q = replicated(&q, continuum.m_eta() / q.m_eta())?;
    Ok(modified_wp(&q, continuum, 1.0)?)
}

pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    let mut report = Report::new(cfg);
    let g = cfg.frequency.build()?;
    let initial = Initial::parse(&cfg.initial, cfg.diameter, cfg.centre, cfg.shift)?;
    if matches!(initial, Initial::Arranged { .. } | Initial::Ensemble(_)) {
        return Err(precondition(
            "meanfield needs an initial density (a profile, dirac or a grid file), not an ensemble",
        ));
    }
    let ladder = &cfg.ladder;
    if ladder.is_empty() || ladder.windows(2).any(|w| w[0] >= w[1]) {
        return Err(precondition("ladder must be non-empty and strictly increasing"));
    }
    let mut sizes = ladder.clone();
    let top = 2 * ladder[ladder.len() - 1];
    if !sizes.contains(&top) {
        sizes.push(top);
    }
    for &n in &sizes {
        let counts = fiber_counts(&g, n).ok_or_else(|| {
            precondition(format!("an {n}-comb does not split evenly over the frequency fibers"))
        })?;
        let per_fiber = counts[0];
        if counts.iter().any(|&c| c != per_fiber) || !cfg.continuum_m_eta.is_multiple_of(per_fiber) {
            return Err(precondition(format!(
                "continuum_m_eta = {} must be a multiple of the {n}-comb's {per_fiber} atoms per fiber, \
                 and all fibers must hold equal mass",
                cfg.continuum_m_eta
            )));
        }
    }
    let t_end = cfg.t_end_or(1.0);
    let params = ParticleParams::new(cfg.coupling, cfg.dt, t_end)?;
    let steps = params.steps().max(1);

    let mut out = Output::create(&cfg.output_dir)?;
    let dir = out.dir().to_path_buf();
    // rungs are independent; each writes its own file
    let mut rng = Rng64::new(cfg.seed);
    let streams: Vec<Rng64> = sizes.iter().map(|_| rng.split()).collect();
    let rungs: Vec<Rung> = sizes
        .par_iter()
        .zip(streams)
        .map(|(&n, mut stream)| -> Result<Rung> {
            let start = initial.ensemble(&g, n, cfg.m_theta_init, &mut stream)?;
            let rec = simulate(&start, &params, steps)?;
            let end = rec.last().clone();
            write_ensemble(&dir.join(format!("comb_{n}.csv")), &end)?;
            Ok(Rung { n, start, end })
        })
        .collect::<Result<_>>()?;
    for r in &rungs {
        out.file(&format!("comb_{}.csv", r.n));
        out.file(&format!("comb_{}.json", r.n));
    }
    let by_n = |n: usize| rungs.iter().find(|r| r.n == n).expect("rung exists");

    let self_pairs: Vec<(f64, f64)> = ladder
        .par_iter()
        .map(|&n| -> Result<(f64, f64)> {
            let (a, b) = (by_n(n), by_n(2 * n));
            Ok((w1_refined(&a.start, &b.start)?, w1_refined(&a.end, &b.end)?))
        })
        .collect::<Result<_>>()?;
    let (self_t0, self_end): (Vec<f64>, Vec<f64>) = self_pairs.into_iter().unzip();

    let c0 = initial.field(&g, cfg.continuum_m_eta, cfg.m_theta_init)?;
    let ctraj = evolve(&c0, &KineticParams::new(cfg.coupling, cfg.dt, t_end)?, steps)?;
    let c_end = ctraj.last();
    let cont: Vec<(f64, f64)> = rungs
        .par_iter()
        .map(|r| -> Result<(f64, f64)> {
            Ok((field_distance(&r.start, &g, &c0)?, field_distance(&r.end, &g, c_end)?))
        })
        .collect::<Result<_>>()?;
    let (cont_t0, cont_end): (Vec<f64>, Vec<f64>) = cont.into_iter().unzip();

    let all_zero = self_end.iter().all(|&v| v == 0.0);
    let decreasing = self_end.windows(2).all(|w| w[1] < w[0]);
    report.check(
        "self_distance_decreasing",
        decreasing || all_zero,
        format!("W1(N, 2N) at t_end: {}", super::fmt_list(&self_end)),
    );
    let top_cont = cont_end[rungs.iter().position(|r| r.n == top).unwrap()];
    let last_self = self_end[self_end.len() - 1];
    report.check(
        "continuum_within_twice_last_rung",
        top_cont <= 2.0 * last_self,
        format!("W1({top}-comb, continuum) = {top_cont:.4e}, 2 W1({}, {top}) = {:.4e}", top / 2, 2.0 * last_self),
    );
    if all_zero {
        report.note("all comb distances vanish (Dirac initial data)");
    }
    if cfg.coupling == 0.0 {
        let gap = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let (gs, gc) = (gap(&self_t0, &self_end), gap(&cont_t0, &cont_end));
        report.check(
            "free_streaming_isometry",
            gs <= ISOMETRY_TOL && gc <= ISOMETRY_TOL,
            format!("max |d(t_end) - d(0)|: combs {gs:.3e}, continuum {gc:.3e}"),
        );
    }

    let ns: Vec<f64> = ladder.iter().map(|&n| n as f64).collect();
    let all_ns: Vec<f64> = rungs.iter().map(|r| r.n as f64).collect();
    report.set("ladder", ladder);
    report.set("self_w1_t0", &self_t0);
    report.set("self_w1_t_end", &self_end);
    report.set("comb_sizes", rungs.iter().map(|r| r.n).collect::<Vec<_>>());
    report.set("continuum_w1_t0", &cont_t0);
    report.set("continuum_w1_t_end", &cont_end);
    out.columns("self.csv", &["n", "w1_t0", "w1_t_end"], &[&ns, &self_t0, &self_end])?;
    out.columns(
        "continuum.csv",
        &["n", "w1_t0", "w1_t_end"],
        &[&all_ns, &cont_t0, &cont_end],
    )?;
    out.finish(&mut report)?;
    Ok(report)
}
