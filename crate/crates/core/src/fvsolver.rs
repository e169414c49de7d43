//! First-order upwind finite volumes for the conservation-law form
//!
//! ```text
//! ∂_t f + ∂_θ(ω[f] f) = 0,   ω[f](θ, Ω) = Ω − K ∫ sin(θ − θ*) ρ(θ*) dθ*
//! ```
//!
//! on `[0, 2π]` with zero flux through both ends. Used as an Eulerian
//! cross-check of the quantile solver, so it favours positivity and exact
//! conservation over accuracy.

use crate::error::{Error, Result};
use crate::measure::GridDensity;
use crate::scalar::{as_f64, cast, count, tree_sum_by, Scalar};
use rayon::prelude::*;

/// Largest admissible Courant number `dt · max|ω| / Δθ`.
pub const MAX_COURANT: f64 = 0.9;

#[derive(Debug, Clone, PartialEq)]
pub struct FvState<T> {
    pub density: GridDensity<T>,
    pub time: T,
    pub dt: T,
}

impl<T: Scalar> FvState<T> {
    pub fn new(density: GridDensity<T>, dt: T) -> Result<Self> {
        if !(dt > T::zero()) {
            return Err(Error::InvalidParameter("dt must be positive".into()));
        }
        Ok(Self {
            time: density.time,
            density,
            dt,
        })
    }
}

/// `(S, C) = (∫ sin θ ρ dθ, ∫ cos θ ρ dθ)` by the midpoint rule.
fn trig_moments<T: Scalar>(f: &GridDensity<T>) -> (T, T) {
    let mt = f.m_theta();
    let omega = f.omega();
    let dtheta = f.dtheta();
    let theta = f.theta_grid();
    let fiber = |k: usize, trig: fn(T) -> T| {
        omega.widths[k] * dtheta * tree_sum_by(0..mt, |m| f.at(m, k) * trig(theta[m]))
    };
    let s = tree_sum_by(0..omega.len(), |k| fiber(k, T::sin));
    let c = tree_sum_by(0..omega.len(), |k| fiber(k, T::cos));
    (s, c)
}

fn velocity_at<T: Scalar>(theta: T, omega: T, coupling: T, s: T, c: T) -> T {
    // ∫ sin(θ − θ*) ρ dθ* = sin θ C − cos θ S
    omega - coupling * (theta.sin() * c - theta.cos() * s)
}

/// `ω(θ_m, Ω_k)` at the cell centres, fiber-major.
pub fn velocity_field<T: Scalar>(f: &GridDensity<T>, coupling: T) -> Vec<T> {
    let (s, c) = trig_moments(f);
    let theta = f.theta_grid();
    let mut out = Vec::with_capacity(f.values().len());
    for &w in &f.omega().nodes {
        out.extend(theta.iter().map(|&th| velocity_at(th, w, coupling, s, c)));
    }
    out
}

/// One forward-Euler upwind step of length `s.dt`.
pub fn fv_step<T: Scalar>(s: &FvState<T>, coupling: T) -> Result<FvState<T>> {
    let f = &s.density;
    let mt = f.m_theta();
    let dtheta = f.dtheta();
    let (sn, cs) = trig_moments(f);
    let nodes = &f.omega().nodes;
    // interior interfaces (m + 1) Δθ, m = 0..M_θ−2
    let faces: Vec<T> = (1..mt).map(|m| dtheta * count(m)).collect();
    let mut courant = T::zero();
    for &w in nodes {
        for &x in &faces {
            courant = courant.max(velocity_at(x, w, coupling, sn, cs).abs());
        }
    }
    courant = courant * s.dt / dtheta;
    if courant > cast(MAX_COURANT) {
        return Err(Error::CflViolation(as_f64(courant)));
    }
    let ratio = s.dt / dtheta;
    let mut values = f.values().to_vec();
    values
        .par_chunks_mut(mt)
        .zip(nodes.par_iter())
        .for_each(|(fiber, &w)| {
            let old = fiber.to_vec();
            let mut flux_left = T::zero();
            for m in 0..mt {
                let flux_right = if m + 1 < mt {
                    let v = velocity_at(faces[m], w, coupling, sn, cs);
                    if v > T::zero() {
                        v * old[m]
                    } else {
                        v * old[m + 1]
                    }
                } else {
                    T::zero()
                };
                fiber[m] = old[m] - ratio * (flux_right - flux_left);
                flux_left = flux_right;
            }
        });
    let mut density = GridDensity::new(mt, f.omega().clone(), values)?;
    density.time = s.time + s.dt;
    Ok(FvState {
        time: density.time,
        density,
        dt: s.dt,
    })
}

/// Step size `t_end / n` with the smallest `n` keeping the Courant number
/// below `courant`, using `max|ω| ≤ max|Ω| + K`.
pub fn stable_dt<T: Scalar>(f: &GridDensity<T>, coupling: T, t_end: T, courant: T) -> T {
    let speed = f
        .omega()
        .nodes
        .iter()
        .fold(T::zero(), |a, w| a.max(w.abs()))
        + coupling;
    let bound = courant * f.dtheta() / speed.max(T::epsilon());
    if !(t_end > T::zero()) {
        return bound;
    }
    let n = (t_end / bound).ceil().max(T::one());
    t_end / n
}

/// Integrates to `t_end`, returning snapshots every `sample_every` steps
/// and at the end.
pub fn fv_simulate<T: Scalar>(
    f0: &GridDensity<T>,
    coupling: T,
    t_end: T,
    sample_every: usize,
) -> Result<Vec<GridDensity<T>>> {
    let marginal = f0.marginal_error();
    if marginal > cast(1e-10) {
        return Err(Error::NonUnitMass(as_f64(f0.total_mass())));
    }
    let dt = stable_dt(f0, coupling, t_end, cast(0.8));
    let steps = (t_end / dt).round().to_usize().unwrap_or(0);
    let sample_every = sample_every.max(1);
    let mut state = FvState::new(f0.clone(), dt)?;
    let mut out = vec![f0.clone()];
    for step in 1..=steps {
        state = fv_step(&state, coupling)?;
        state.time = f0.time + dt * count(step);
        state.density.time = state.time;
        if step % sample_every == 0 || step == steps {
            out.push(state.density.clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::FrequencyDensity;
    use std::f64::consts::PI;

    fn bump(m: usize, g: &FrequencyDensity<f64>, centre: f64, width: f64) -> GridDensity<f64> {
        GridDensity::from_profile(m, g, |th, _| {
            let x = (th - centre) / width;
            if x.abs() < 1.0 {
                (1.0 + (PI * x).cos()) / 2.0
            } else {
                0.0
            }
        })
        .unwrap()
    }

    #[test]
    fn decoupled_velocity_is_frequency() {
        let g = FrequencyDensity::<f64>::uniform(0.5, 4).unwrap();
        let f = bump(32, &g, PI, 1.0);
        let v = velocity_field(&f, 0.0);
        for k in 0..4 {
            assert!(v[k * 32..(k + 1) * 32].iter().all(|&x| x == g.grid().nodes[k]));
        }
    }

    #[test]
    fn symmetric_density_has_still_centre() {
        let g = FrequencyDensity::<f64>::identical();
        let f = bump(33, &g, PI, 1.0);
        let v = velocity_field(&f, 2.0);
        assert!(v[16].abs() < 1e-14);
    }

    #[test]
    fn single_cell_velocity() {
        let g = FrequencyDensity::<f64>::identical();
        let m = 101;
        let mut values = vec![0.0; m];
        values[50] = m as f64 / (2.0 * PI);
        let f = GridDensity::new(m, g.grid().clone(), values).unwrap();
        let v = velocity_field(&f, 1.0);
        for (i, th) in f.theta_grid().iter().enumerate() {
            assert!((v[i] + (th - PI).sin()).abs() < 1e-12);
        }
    }

    #[test]
    fn mass_is_conserved_per_fiber() {
        let g = FrequencyDensity::<f64>::uniform(0.5, 4).unwrap();
        let f = bump(128, &g, PI, 1.5);
        let snaps = fv_simulate(&f, 2.0, 1.0, 10).unwrap();
        for k in 0..4 {
            let m0 = f.fiber_marginal(k);
            for s in &snaps {
                assert!((s.fiber_marginal(k) - m0).abs() < 1e-13);
            }
        }
        assert!(snaps.iter().all(|s| s.values().iter().all(|&v| v >= 0.0)));
    }

    #[test]
    fn free_transport_moves_centre_of_mass_at_frequency() {
        let omega = crate::measure::OmegaGrid::new(vec![0.7], vec![1.0], vec![1.0]).unwrap();
        let m = 256;
        let dtheta = 2.0 * PI / m as f64;
        let values: Vec<f64> = (0..m)
            .map(|i| if (60..90).contains(&i) { 1.0 / (30.0 * dtheta) } else { 0.0 })
            .collect();
        let f = GridDensity::new(m, omega, values).unwrap();
        let snaps = fv_simulate(&f, 0.0, 1.0, 1).unwrap();
        let c0 = f.theta_mean() / f.total_mass();
        for s in &snaps {
            let c = s.theta_mean() / s.total_mass();
            assert!((c - c0 - 0.7 * s.time).abs() < 1e-10);
        }
    }

    #[test]
    fn cfl_is_enforced() {
        let g = FrequencyDensity::<f64>::identical();
        let f = bump(64, &g, PI, 1.0);
        let s = FvState::new(f, 1.0).unwrap();
        assert!(matches!(fv_step(&s, 1.0), Err(Error::CflViolation(_))));
    }
}
