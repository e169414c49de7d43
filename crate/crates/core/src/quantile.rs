//! Lagrangian solver: the kinetic equation written for the per-fiber
//! pseudo-inverse,
//!
//! ```text
//! ∂_t φ(η, Ω) = Ω + K ∫∫ sin(φ(η*, Ω*) − φ(η, Ω)) dη* dΩ*
//! ```
//!
//! discretised on the `(j, k)` quantile lattice and advanced with RK4.

use crate::error::{Error, Result};
use crate::measure::{GridDensity, QuantileField};
use crate::scalar::{as_f64, cast, count, tree_sum, tree_sum_by, two_pi, Scalar};
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KineticParams<T> {
    pub coupling: T,
    pub dt: T,
    pub t_end: T,
}

impl<T: Scalar> KineticParams<T> {
    /// Same admissible ranges as [`crate::ParticleParams::new`].
    pub fn new(coupling: T, dt: T, t_end: T) -> Result<Self> {
        let p = crate::particle::ParticleParams::new(coupling, dt, t_end)?;
        Ok(Self {
            coupling: p.coupling,
            dt: p.dt,
            t_end: p.t_end,
        })
    }

    pub fn with_default_dt(coupling: T, t_end: T) -> Result<Self> {
        let p = crate::particle::ParticleParams::with_default_dt(coupling, t_end)?;
        Ok(Self {
            coupling: p.coupling,
            dt: p.dt,
            t_end: p.t_end,
        })
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round().to_usize().unwrap_or(0)
    }
}

/// Per-sample weights `w_{j,k}` in lattice order.
fn lattice_weights<T: Scalar>(q: &QuantileField<T>) -> Vec<T> {
    let m = q.m_eta();
    let mut w = Vec::with_capacity(q.phi().len());
    for k in 0..q.omega().len() {
        w.extend(std::iter::repeat_n(q.weight(k), m));
    }
    w
}

fn frequencies<T: Scalar>(q: &QuantileField<T>) -> Vec<T> {
    let m = q.m_eta();
    let mut out = Vec::with_capacity(q.phi().len());
    for &w in &q.omega().nodes {
        out.extend(std::iter::repeat_n(w, m));
    }
    out
}

const PARALLEL_MIN: usize = 1 << 14;

fn rhs_into<T: Scalar>(phi: &[T], weights: &[T], freq: &[T], coupling: T, out: &mut [T]) {
    let s = tree_sum_by(0..phi.len(), |i| weights[i] * phi[i].sin());
    let c = tree_sum_by(0..phi.len(), |i| weights[i] * phi[i].cos());
    let entry = |i: usize| freq[i] + coupling * (s * phi[i].cos() - c * phi[i].sin());
    if phi.len() >= PARALLEL_MIN {
        out.par_iter_mut().enumerate().for_each(|(i, o)| *o = entry(i));
    } else {
        for (i, o) in out.iter_mut().enumerate() {
            *o = entry(i);
        }
    }
}

/// `dφ_{j,k}/dt` through the two global sums `Σ w sin φ`, `Σ w cos φ`.
pub fn phi_rhs<T: Scalar>(q: &QuantileField<T>, coupling: T) -> Vec<T> {
    let mut out = vec![T::zero(); q.phi().len()];
    rhs_into(q.phi(), &lattice_weights(q), &frequencies(q), coupling, &mut out);
    out
}

/// `dφ_{j,k}/dt` by the explicit double sum over the lattice.
pub fn phi_rhs_pairwise<T: Scalar>(q: &QuantileField<T>, coupling: T) -> Vec<T> {
    let w = lattice_weights(q);
    let freq = frequencies(q);
    let phi = q.phi();
    let row = |i: usize| {
        let sum = tree_sum_by(0..phi.len(), |j| w[j] * (phi[j] - phi[i]).sin());
        freq[i] + coupling * sum
    };
    if phi.len() >= 256 {
        (0..phi.len()).into_par_iter().map(row).collect()
    } else {
        (0..phi.len()).map(row).collect()
    }
}

/// Sampled quantile trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileTrajectory<T> {
    pub snapshots: Vec<QuantileField<T>>,
}

impl<T: Scalar> QuantileTrajectory<T> {
    pub fn times(&self) -> Vec<T> {
        self.snapshots.iter().map(|q| q.time).collect()
    }

    pub fn diameters(&self) -> Vec<T> {
        self.snapshots.iter().map(field_diameter).collect()
    }

    pub fn theta_means(&self) -> Vec<T> {
        self.snapshots.iter().map(|q| q.theta_mean()).collect()
    }

    pub fn last(&self) -> &QuantileField<T> {
        self.snapshots.last().expect("trajectory holds the initial field")
    }
}

/// Advances `q0` with RK4, sampling every `sample_every` steps and at the end.
///
/// The field is checked after every step; a crossing or an escape from
/// `(0, 2π)` aborts the run.
pub fn evolve<T: Scalar>(
    q0: &QuantileField<T>,
    params: &KineticParams<T>,
    sample_every: usize,
) -> Result<QuantileTrajectory<T>> {
    q0.check_invariants()?;
    let total = q0.total_weight();
    if (total - T::one()).abs() > cast(1e-10) {
        return Err(Error::NonUnitMass(as_f64(total)));
    }
    let sample_every = sample_every.max(1);
    let weights = lattice_weights(q0);
    let freq = frequencies(q0);
    let n = weights.len();
    let (mut k1, mut k2, mut k3, mut k4) =
        (vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n], vec![T::zero(); n]);
    let mut stage = vec![T::zero(); n];
    let mut state = q0.clone();
    let mut out = QuantileTrajectory {
        snapshots: vec![q0.clone()],
    };
    let dt = params.dt;
    let half = dt * cast(0.5);
    let sixth = dt / cast(6.0);
    let two = cast::<T>(2.0);
    let limit = T::FRAC_PI_4();
    let steps = params.steps();
    for step in 1..=steps {
        let phi = state.phi_mut();
        rhs_into(phi, &weights, &freq, params.coupling, &mut k1);
        let excursion = k1.iter().fold(T::zero(), |a, v| a.max(v.abs())) * dt;
        if excursion > limit {
            return Err(Error::UnstableStep(as_f64(excursion)));
        }
        for i in 0..n {
            stage[i] = phi[i] + half * k1[i];
        }
        rhs_into(&stage, &weights, &freq, params.coupling, &mut k2);
        for i in 0..n {
            stage[i] = phi[i] + half * k2[i];
        }
        rhs_into(&stage, &weights, &freq, params.coupling, &mut k3);
        for i in 0..n {
            stage[i] = phi[i] + dt * k3[i];
        }
        rhs_into(&stage, &weights, &freq, params.coupling, &mut k4);
        for i in 0..n {
            phi[i] += sixth * (k1[i] + two * k2[i] + two * k3[i] + k4[i]);
        }
        state.time = q0.time + dt * count(step);
        state.check_invariants()?;
        if step % sample_every == 0 || step == steps {
            out.snapshots.push(state.clone());
        }
    }
    Ok(out)
}

/// `max_k φ(g(Ω_k), Ω_k) − min_k φ(0, Ω_k)` over occupied fibers, with the
/// endpoint quantiles extrapolated from the two nearest samples.
pub fn field_diameter<T: Scalar>(q: &QuantileField<T>) -> T {
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for k in q.occupied_fibers() {
        lo = lo.min(q.lower_endpoint(k));
        hi = hi.max(q.upper_endpoint(k));
    }
    if lo > hi {
        T::zero()
    } else {
        hi - lo
    }
}

/// Histogram of quantile mass on `m_theta` cells: each sample of fiber `k`
/// carries `g(Ω_k) / M_η` of θ-mass.
pub fn density_from_quantile<T: Scalar>(q: &QuantileField<T>, m_theta: usize) -> Result<GridDensity<T>> {
    if m_theta == 0 {
        return Err(Error::InvalidParameter("M_theta must be positive".into()));
    }
    let dtheta = two_pi::<T>() / count(m_theta);
    let mut values = vec![T::zero(); m_theta * q.omega().len()];
    for k in 0..q.omega().len() {
        let unit = q.omega().density[k] / count(q.m_eta()) / dtheta;
        let fiber = &mut values[k * m_theta..(k + 1) * m_theta];
        let mut counts = vec![0usize; m_theta];
        for &v in q.column(k) {
            let m = (v / dtheta).floor().to_usize().unwrap_or(0).min(m_theta - 1);
            counts[m] += 1;
        }
        for (f, c) in fiber.iter_mut().zip(counts) {
            *f = unit * count(c);
        }
    }
    let mut f = GridDensity::new(m_theta, q.omega().clone(), values)?;
    f.time = q.time;
    Ok(f)
}

/// Total weight `Σ w_{j,k}` checked against one; kept next to the solver
/// for callers that assemble fields by hand.
pub fn total_weight_error<T: Scalar>(q: &QuantileField<T>) -> T {
    (tree_sum(&lattice_weights(q)) - T::one()).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{FrequencyDensity, OmegaGrid, PhaseEnsemble};
    use crate::particle::{kuramoto_rhs, simulate, ParticleParams};
    use std::f64::consts::PI;

    fn single_fiber(phi: Vec<f64>) -> QuantileField<f64> {
        let g = FrequencyDensity::<f64>::identical();
        QuantileField::new(phi.len(), g.grid().clone(), phi).unwrap()
    }

    #[test]
    fn dirac_is_an_equilibrium() {
        let q = single_fiber(vec![PI; 8]);
        assert!(phi_rhs(&q, 3.0).iter().all(|v| v.abs() < 1e-15));
        let p = KineticParams::new(1.0, 1e-2, 1.0).unwrap();
        let traj = evolve(&q, &p, 10).unwrap();
        assert!(traj.last().phi().iter().all(|&v| (v - PI).abs() < 1e-14));
    }

    #[test]
    fn decoupled_rhs_is_transport() {
        let g = FrequencyDensity::<f64>::atoms(vec![(-0.5, 0.5), (0.5, 0.5)]).unwrap();
        let q = QuantileField::new(2, g.grid().clone(), vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(phi_rhs(&q, 0.0), vec![-0.5, -0.5, 0.5, 0.5]);
    }

    #[test]
    fn trig_sum_form_matches_double_sum() {
        let g = FrequencyDensity::<f64>::uniform(0.5, 6).unwrap();
        let phi: Vec<f64> = (0..6)
            .flat_map(|k| (0..10).map(move |j| 2.0 + 0.1 * j as f64 + 0.03 * k as f64))
            .collect();
        let q = QuantileField::new(10, g.grid().clone(), phi).unwrap();
        let a = phi_rhs(&q, 1.7);
        let b = phi_rhs_pairwise(&q, 1.7);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn comb_field_matches_particle_rhs() {
        let g = FrequencyDensity::<f64>::atoms(vec![(-0.5, 0.5), (0.5, 0.5)]).unwrap();
        let theta = vec![2.0, 2.4, 3.1, 1.5, 2.2, 4.0];
        let omega = vec![-0.5, -0.5, -0.5, 0.5, 0.5, 0.5];
        let e = PhaseEnsemble::new(theta, omega).unwrap();
        let q = QuantileField::from_ensemble(&e, g.grid()).unwrap();
        let field = phi_rhs(&q, 2.0);
        let particles = kuramoto_rhs(&q.to_ensemble(), 2.0);
        for (x, y) in field.iter().zip(&particles) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn comb_trajectory_matches_particles() {
        let g = FrequencyDensity::<f64>::atoms(vec![(-0.5, 0.5), (0.5, 0.5)]).unwrap();
        let theta: Vec<f64> = (0..16).map(|i| 2.0 + 0.13 * i as f64).collect();
        let omega: Vec<f64> = (0..16).map(|i| if i < 8 { -0.5 } else { 0.5 }).collect();
        let e = PhaseEnsemble::new(theta, omega).unwrap();
        let q = QuantileField::from_ensemble(&e, g.grid()).unwrap();
        let kp = KineticParams::new(2.0, 1e-3, 1.0).unwrap();
        let pp = ParticleParams::new(2.0, 1e-3, 1.0).unwrap();
        let a = evolve(&q, &kp, 1000).unwrap();
        let b = simulate(&q.to_ensemble(), &pp, 1000).unwrap();
        for (x, y) in a.last().phi().iter().zip(&b.last().theta) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn leaving_the_strip_aborts() {
        let g = FrequencyDensity::<f64>::atoms(vec![(-3.0, 0.5), (3.0, 0.5)]).unwrap();
        let q = QuantileField::new(1, g.grid().clone(), vec![1.0, 6.0]).unwrap();
        let p = KineticParams::new(0.0, 1e-2, 1.0).unwrap();
        assert!(matches!(
            evolve(&q, &p, 1),
            Err(Error::SupportEscape { .. })
        ));
    }

    #[test]
    fn mass_is_checked() {
        let grid = OmegaGrid::new(vec![0.0], vec![1.0], vec![0.5]).unwrap();
        let q = QuantileField::new(2, grid, vec![1.0, 2.0]).unwrap();
        let p = KineticParams::new(1.0, 1e-2, 1.0).unwrap();
        assert!(matches!(evolve(&q, &p, 1), Err(Error::NonUnitMass(_))));
    }

    #[test]
    fn diameter_cases() {
        assert_eq!(field_diameter(&single_fiber(vec![2.0])), 0.0);
        let m = 200;
        let phi: Vec<f64> = (0..m).map(|j| 1.0 + 2.0 * (j as f64 + 0.5) / m as f64).collect();
        assert!((field_diameter(&single_fiber(phi)) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn histogram_keeps_fiber_marginals() {
        let g = FrequencyDensity::<f64>::uniform(0.5, 4).unwrap();
        let f = GridDensity::from_profile(64, &g, |th, _| (-(th - PI).powi(2) * 4.0).exp()).unwrap();
        let q = QuantileField::from_density(&f, 100).unwrap();
        let h = density_from_quantile(&q, 64).unwrap();
        for k in 0..4 {
            assert!((h.fiber_marginal(k) - g.grid().density[k]).abs() < 1e-13);
        }
    }

    #[test]
    fn dirac_histogram_loads_one_cell() {
        let h = density_from_quantile(&single_fiber(vec![PI + 1e-3; 5]), 10).unwrap();
        let loaded: Vec<usize> = (0..10).filter(|&m| h.at(m, 0) > 0.0).collect();
        assert_eq!(loaded, vec![5]);
    }
}
