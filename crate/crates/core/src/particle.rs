//! The N-oscillator Kuramoto system
//!
//! ```text
//! dθ_i/dt = Ω_i − (K/N) Σ_j sin(θ_i − θ_j),   dΩ_i/dt = 0
//! ```
//!
//! integrated with fixed-step RK4 on the lift of the phases to ℝ, together
//! with the particle-level diagnostics.

use crate::error::{Error, Result};
use crate::measure::{FrequencyDensity, PhaseEnsemble};
use crate::scalar::{as_f64, cast, count, tree_sum_by, Scalar};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleParams<T> {
    pub coupling: T,
    pub dt: T,
    pub t_end: T,
}

impl<T: Scalar> ParticleParams<T> {
    /// Requires `K ≥ 0`, `t_end ≥ 0` and `0 < dt ≤ 0.1 / max(1, K)`.
    pub fn new(coupling: T, dt: T, t_end: T) -> Result<Self> {
        if !(coupling >= T::zero()) || !coupling.is_finite() {
            return Err(Error::InvalidParameter("coupling must be finite and >= 0".into()));
        }
        if !(t_end >= T::zero()) {
            return Err(Error::InvalidParameter("t_end must be >= 0".into()));
        }
        let limit = cast::<T>(0.1) / coupling.max(T::one());
        if !(dt > T::zero()) || dt > limit {
            return Err(Error::InvalidParameter(format!(
                "dt = {} outside (0, {}]",
                as_f64(dt),
                as_f64(limit)
            )));
        }
        Ok(Self {
            coupling,
            dt,
            t_end,
        })
    }

    /// `dt = 1e-3 · min(1, 1/K)`.
    pub fn with_default_dt(coupling: T, t_end: T) -> Result<Self> {
        let dt = cast::<T>(1e-3) * T::one().min(T::one() / coupling.max(T::epsilon()));
        Self::new(coupling, dt, t_end)
    }

    /// Number of RK4 steps needed to reach `t_end`.
    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round().to_usize().unwrap_or(0)
    }
}

/// Mean phasor `(C̄, S̄) = ((1/N) Σ cos θ_j, (1/N) Σ sin θ_j)`.
fn mean_phasor<T: Scalar>(theta: &[T]) -> (T, T) {
    let n = count::<T>(theta.len());
    let c = tree_sum_by(theta.iter(), |th| th.cos()) / n;
    let s = tree_sum_by(theta.iter(), |th| th.sin()) / n;
    (c, s)
}

fn rhs_into<T: Scalar>(theta: &[T], omega: &[T], coupling: T, out: &mut [T]) {
    let (c, s) = mean_phasor(theta);
    for ((o, &th), &w) in out.iter_mut().zip(theta).zip(omega) {
        // (1/N) Σ_j sin(θ_i − θ_j) = sin θ_i C̄ − cos θ_i S̄
        *o = w - coupling * (th.sin() * c - th.cos() * s);
    }
}

/// `dθ_i/dt` through the mean phasor, `O(N)`.
pub fn kuramoto_rhs<T: Scalar>(e: &PhaseEnsemble<T>, coupling: T) -> Vec<T> {
    let mut out = vec![T::zero(); e.len()];
    rhs_into(&e.theta, &e.omega, coupling, &mut out);
    out
}

/// `dθ_i/dt` by the explicit pairwise sum, `O(N²)`.
///
/// Rows are evaluated in parallel for large `N`; each row is reduced with
/// [`tree_sum`], so the output does not depend on the thread count.
pub fn kuramoto_rhs_pairwise<T: Scalar>(e: &PhaseEnsemble<T>, coupling: T) -> Vec<T> {
    let n = count::<T>(e.len());
    let row = |i: usize| {
        let th = e.theta[i];
        let sum = tree_sum_by(e.theta.iter(), |&tj| (th - tj).sin());
        e.omega[i] - coupling / n * sum
    };
    if e.len() >= 256 {
        (0..e.len()).into_par_iter().map(row).collect()
    } else {
        (0..e.len()).map(row).collect()
    }
}

/// One classical RK4 step. Ω is untouched and θ is not wrapped.
pub fn step_rk4<T: Scalar>(e: &PhaseEnsemble<T>, params: &ParticleParams<T>) -> PhaseEnsemble<T> {
    let mut scratch = Rk4Scratch::new(e.len());
    let mut theta = e.theta.clone();
    scratch.advance(&mut theta, &e.omega, params.coupling, params.dt);
    PhaseEnsemble::from_parts(theta, e.omega.clone(), e.time + params.dt)
}

struct Rk4Scratch<T> {
    k1: Vec<T>,
    k2: Vec<T>,
    k3: Vec<T>,
    k4: Vec<T>,
    stage: Vec<T>,
}

impl<T: Scalar> Rk4Scratch<T> {
    fn new(n: usize) -> Self {
        Self {
            k1: vec![T::zero(); n],
            k2: vec![T::zero(); n],
            k3: vec![T::zero(); n],
            k4: vec![T::zero(); n],
            stage: vec![T::zero(); n],
        }
    }

    /// Advances `theta` in place and returns `max |k1| · dt`.
    fn advance(&mut self, theta: &mut [T], omega: &[T], coupling: T, dt: T) -> T {
        let half = dt * cast(0.5);
        rhs_into(theta, omega, coupling, &mut self.k1);
        for ((s, &th), &k) in self.stage.iter_mut().zip(theta.iter()).zip(&self.k1) {
            *s = th + half * k;
        }
        rhs_into(&self.stage, omega, coupling, &mut self.k2);
        for ((s, &th), &k) in self.stage.iter_mut().zip(theta.iter()).zip(&self.k2) {
            *s = th + half * k;
        }
        rhs_into(&self.stage, omega, coupling, &mut self.k3);
        for ((s, &th), &k) in self.stage.iter_mut().zip(theta.iter()).zip(&self.k3) {
            *s = th + dt * k;
        }
        rhs_into(&self.stage, omega, coupling, &mut self.k4);
        let sixth = dt / cast(6.0);
        let two = cast::<T>(2.0);
        for i in 0..theta.len() {
            theta[i] += sixth * (self.k1[i] + two * self.k2[i] + two * self.k3[i] + self.k4[i]);
        }
        self.k1.iter().fold(T::zero(), |a, k| a.max(k.abs())) * dt
    }
}

/// Sampled trajectory of an ensemble with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord<T> {
    pub times: Vec<T>,
    pub snapshots: Vec<PhaseEnsemble<T>>,
    pub diameters: Vec<T>,
    pub order_param: Vec<T>,
    pub mean_phase: Vec<T>,
}

impl<T: Scalar> TrajectoryRecord<T> {
    fn push(&mut self, e: &PhaseEnsemble<T>) {
        self.times.push(e.time);
        self.diameters.push(phase_diameter(e));
        self.order_param.push(order_parameter(e));
        self.mean_phase.push(e.mean_phase());
        self.snapshots.push(e.clone());
    }

    pub fn last(&self) -> &PhaseEnsemble<T> {
        self.snapshots.last().expect("record holds the initial state")
    }

    /// Sample indices where `r` dropped by more than `slack`.
    pub fn order_parameter_drops(&self, slack: T) -> Vec<usize> {
        self.order_param
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[1] < w[0] - slack)
            .map(|(i, _)| i + 1)
            .collect()
    }
}

/// Integrates `e0` to `params.t_end`, sampling every `sample_every` steps
/// (and always at the final step).
pub fn simulate<T: Scalar>(
    e0: &PhaseEnsemble<T>,
    params: &ParticleParams<T>,
    sample_every: usize,
) -> Result<TrajectoryRecord<T>> {
    if e0.is_empty() {
        return Err(Error::InvalidParameter("empty ensemble".into()));
    }
    let sample_every = sample_every.max(1);
    let steps = params.steps();
    let mut record = TrajectoryRecord {
        times: Vec::new(),
        snapshots: Vec::new(),
        diameters: Vec::new(),
        order_param: Vec::new(),
        mean_phase: Vec::new(),
    };
    record.push(e0);
    let limit = T::FRAC_PI_4();
    let mut scratch = Rk4Scratch::new(e0.len());
    let mut theta = e0.theta.clone();
    for step in 1..=steps {
        let excursion = scratch.advance(&mut theta, &e0.omega, params.coupling, params.dt);
        if excursion > limit {
            return Err(Error::UnstableStep(as_f64(excursion)));
        }
        if step % sample_every == 0 || step == steps {
            let t = e0.time + params.dt * count(step);
            record.push(&PhaseEnsemble::from_parts(theta.clone(), e0.omega.clone(), t));
        }
    }
    Ok(record)
}

/// `max_i θ_i − min_i θ_i` on the lift.
pub fn phase_diameter<T: Scalar>(e: &PhaseEnsemble<T>) -> T {
    spread(&e.theta)
}

/// `max_i Ω_i − min_i Ω_i`.
pub fn freq_diameter<T: Scalar>(e: &PhaseEnsemble<T>) -> T {
    spread(&e.omega)
}

fn spread<T: Scalar>(xs: &[T]) -> T {
    let (lo, hi) = xs.iter().fold((T::infinity(), T::neg_infinity()), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    });
    if xs.is_empty() {
        T::zero()
    } else {
        hi - lo
    }
}

/// `r = |(1/N) Σ e^{iθ_j}|`.
pub fn order_parameter<T: Scalar>(e: &PhaseEnsemble<T>) -> T {
    let (c, s) = mean_phasor(&e.theta);
    c.hypot(s).min(T::one())
}

/// `K_cr = 2 / (π g(0))`.
pub fn critical_coupling<T: Scalar>(g: &FrequencyDensity<T>) -> Result<T> {
    let g0 = g.value_at(T::zero());
    if !(g0 > T::zero()) {
        return Err(Error::ZeroDensityAtOrigin);
    }
    Ok(cast::<T>(2.0) / (T::PI() * g0))
}

/// Trapping width and entry time for non-identical oscillators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrappingEstimate<T> {
    /// `D∞ = arcsin(D_Ω / K)`.
    pub d_inf: T,
    /// `t0 = (D_θ0 − D∞) / (K sin D_θ0 − D_Ω)`, or zero when already trapped.
    pub t0: T,
}

/// Requires `0 < D_θ0 < π`, `D_Ω > 0` and `K > D_Ω / sin D_θ0`.
pub fn trapping_estimates<T: Scalar>(
    d_theta0: T,
    d_omega: T,
    coupling: T,
) -> Result<TrappingEstimate<T>> {
    if !(d_theta0 > T::zero() && d_theta0 < T::PI()) {
        return Err(Error::InvalidParameter(format!(
            "initial phase diameter {} outside (0, pi)",
            as_f64(d_theta0)
        )));
    }
    if !(d_omega > T::zero()) {
        return Err(Error::InvalidParameter(
            "frequency diameter must be positive".into(),
        ));
    }
    let threshold = d_omega / d_theta0.sin();
    if !(coupling > threshold) {
        return Err(Error::CouplingTooWeak {
            coupling: as_f64(coupling),
            threshold: as_f64(threshold),
        });
    }
    let d_inf = (d_omega / coupling).asin();
    let t0 = if d_theta0 > d_inf {
        (d_theta0 - d_inf) / (coupling * d_theta0.sin() - d_omega)
    } else {
        T::zero()
    };
    Ok(TrappingEstimate { d_inf, t0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn ens(theta: Vec<f64>, omega: Vec<f64>) -> PhaseEnsemble<f64> {
        PhaseEnsemble::new(theta, omega).unwrap()
    }

    #[test]
    fn decoupled_rhs_is_natural_frequency() {
        let e = ens(vec![0.1, 2.0, 4.0], vec![0.3, -0.2, 1.0]);
        assert_eq!(kuramoto_rhs(&e, 0.0), vec![0.3, -0.2, 1.0]);
    }

    #[test]
    fn two_body_rhs_by_hand() {
        let e = ens(vec![0.0, PI / 2.0], vec![0.0, 0.0]);
        for rhs in [kuramoto_rhs(&e, 1.0), kuramoto_rhs_pairwise(&e, 1.0)] {
            assert!((rhs[0] - 0.5).abs() < 1e-15);
            assert!((rhs[1] + 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn synchronized_phases_feel_no_coupling() {
        let e = ens(vec![1.3; 5], vec![0.1, 0.2, 0.3, 0.4, 0.5]);
        let rhs = kuramoto_rhs(&e, 3.0);
        for (r, w) in rhs.iter().zip(&e.omega) {
            assert!((r - w).abs() < 1e-15);
        }
    }

    #[test]
    fn free_streaming_is_exact() {
        let e = ens(vec![1.0, 2.0], vec![0.5, -0.25]);
        let p = ParticleParams::new(0.0, 0.01, 1.0).unwrap();
        let rec = simulate(&e, &p, 10).unwrap();
        for snap in &rec.snapshots {
            assert!((snap.theta[0] - (1.0 + 0.5 * snap.time)).abs() < 1e-13);
            assert!((snap.theta[1] - (2.0 - 0.25 * snap.time)).abs() < 1e-13);
        }
    }

    fn two_body_exact(delta0: f64, k: f64, t: f64) -> f64 {
        // dΔ/dt = −K sin Δ  ⇒  tan(Δ/2) = tan(Δ0/2) e^{−Kt}
        2.0 * ((delta0 / 2.0).tan() * (-k * t).exp()).atan()
    }

    fn two_body_error(dt: f64) -> f64 {
        let e = ens(vec![PI - 1.0, PI + 1.0], vec![0.0, 0.0]);
        let p = ParticleParams::new(1.0, dt, 1.0).unwrap();
        let last = simulate(&e, &p, usize::MAX).unwrap().last().clone();
        let delta = last.theta[1] - last.theta[0];
        (delta - two_body_exact(2.0, 1.0, 1.0)).abs()
    }

    #[test]
    fn rk4_matches_two_body_closed_form() {
        assert!(two_body_error(1e-3) < 1e-8);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let coarse = two_body_error(0.1);
        let fine = two_body_error(0.05);
        assert!(coarse / fine >= 12.0, "ratio {}", coarse / fine);
    }

    #[test]
    fn mean_phase_drifts_at_mean_frequency() {
        let e = ens(vec![2.0, 2.5, 3.0, 3.8], vec![0.4, -0.1, 0.3, -0.2]);
        let p = ParticleParams::new(2.0, 1e-3, 2.0).unwrap();
        let rec = simulate(&e, &p, 100).unwrap();
        let wc = e.mean_frequency();
        for (t, m) in rec.times.iter().zip(&rec.mean_phase) {
            assert!((m - rec.mean_phase[0] - wc * t).abs() < 1e-10);
        }
    }

    #[test]
    fn identical_oscillators_contract() {
        let theta: Vec<f64> = (0..20).map(|i| PI - 1.0 + 2.0 * i as f64 / 19.0).collect();
        let e = PhaseEnsemble::identical(theta).unwrap();
        let p = ParticleParams::new(1.0, 1e-3, 3.0).unwrap();
        let rec = simulate(&e, &p, 50).unwrap();
        assert!(rec.diameters.windows(2).all(|w| w[1] < w[0]));
        assert!(rec.order_parameter_drops(1e-8).is_empty());
    }

    #[test]
    fn unstable_steps_are_refused() {
        let e = ens(vec![1.0], vec![100.0]);
        let p = ParticleParams::new(0.0, 0.01, 1.0).unwrap();
        assert!(matches!(simulate(&e, &p, 1), Err(Error::UnstableStep(_))));
    }

    #[test]
    fn diameters() {
        assert_eq!(phase_diameter(&ens(vec![1.0], vec![0.0])), 0.0);
        assert_eq!(phase_diameter(&ens(vec![1.0, 2.5], vec![0.0, 0.0])), 1.5);
        assert_eq!(freq_diameter(&ens(vec![1.0, 2.5], vec![-0.5, 0.5])), 1.0);
    }

    #[test]
    fn diameter_matches_pairwise_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let theta: Vec<f64> = (0..100).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
        let e = PhaseEnsemble::identical(theta.clone()).unwrap();
        let mut best: f64 = 0.0;
        for a in &theta {
            for b in &theta {
                best = best.max((a - b).abs());
            }
        }
        assert_eq!(phase_diameter(&e), best);
    }

    #[test]
    fn order_parameter_cases() {
        assert!((order_parameter(&ens(vec![2.0; 4], vec![0.0; 4])) - 1.0).abs() < 1e-15);
        let roots: Vec<f64> = (0..8).map(|j| 2.0 * PI * j as f64 / 8.0).collect();
        assert!(order_parameter(&PhaseEnsemble::identical(roots).unwrap()) < 1e-12);
        let anti = ens(vec![1.0, 1.0 + PI], vec![0.0, 0.0]);
        assert!(order_parameter(&anti) < 1e-15);
    }

    #[test]
    fn critical_coupling_values() {
        let u = FrequencyDensity::<f64>::uniform(1.0, 10).unwrap();
        assert!((critical_coupling(&u).unwrap() - 4.0 / PI).abs() < 1e-15);
        let t = FrequencyDensity::<f64>::tent(1.0, 10).unwrap();
        assert!((critical_coupling(&t).unwrap() - 2.0 / PI).abs() < 1e-15);
        let lambda = 2.5;
        let d = u.dilated(lambda).unwrap();
        let expect = 2.0 / (PI * lambda * u.value_at(0.0));
        assert!((critical_coupling(&d).unwrap() - expect).abs() < 1e-14);
        let atoms = FrequencyDensity::<f64>::atoms(vec![(-0.5, 0.5), (0.5, 0.5)]).unwrap();
        assert_eq!(critical_coupling(&atoms), Err(Error::ZeroDensityAtOrigin));
    }

    #[test]
    fn trapping_values() {
        let est = trapping_estimates(2.0, 1.0, 2.0).unwrap();
        assert!((est.d_inf - PI / 6.0).abs() < 1e-15);
        let t0 = (2.0 - PI / 6.0) / (2.0 * 2f64.sin() - 1.0);
        assert!((est.t0 - t0).abs() < 1e-15);
        assert!((t0 - 1.803_579_900_137_627).abs() < 1e-12);
        let tiny = trapping_estimates(2.0, 1e-12, 2.0).unwrap();
        assert!(tiny.d_inf < 1e-11);
        assert!(matches!(
            trapping_estimates(2.0, 1.0, 1.0),
            Err(Error::CouplingTooWeak { .. })
        ));
        assert!(trapping_estimates(3.5, 1.0, 5.0).is_err());
    }

    #[test]
    fn params_enforce_step_limit() {
        assert!(ParticleParams::new(1.0, 0.2, 1.0).is_err());
        assert!(ParticleParams::new(10.0, 0.02, 1.0).is_err());
        let p = ParticleParams::with_default_dt(4.0, 1.0).unwrap();
        assert_eq!(p.dt, 2.5e-4);
    }

    #[test]
    fn runs_in_single_precision() {
        let e = PhaseEnsemble::<f32>::identical(vec![2.0, 3.0, 4.0]).unwrap();
        let p = ParticleParams::new(1.0f32, 1e-2, 1.0).unwrap();
        let rec = simulate(&e, &p, 10).unwrap();
        assert!(rec.diameters.last().unwrap() < &2.0);
    }
}
