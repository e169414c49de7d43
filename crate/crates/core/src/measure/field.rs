//! Quantile fields: the pseudo-inverse `φ(s·g(Ω_k), Ω_k)` sampled on a
//! uniform lattice of fractions `s_j`.

use super::density::OmegaGrid;
use super::ensemble::PhaseEnsemble;
use super::grid::{build_cdf, GridDensity};
use crate::error::{Error, Result};
use crate::scalar::{as_f64, cast, count, tree_sum_by, two_pi, Scalar};

/// `s_j = (j - 1/2) / M_η` for `j = 1..=M_η`.
pub fn eta_fractions<T: Scalar>(m_eta: usize) -> Vec<T> {
    (0..m_eta)
        .map(|j| (count::<T>(j) + cast(0.5)) / count(m_eta))
        .collect()
}

/// Quantile samples `φ_{j,k}` stored fiber-major (`phi[k * M_η + j]`).
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileField<T> {
    m_eta: usize,
    fractions: Vec<T>,
    omega: OmegaGrid<T>,
    phi: Vec<T>,
    pub time: T,
}

impl<T: Scalar> QuantileField<T> {
    /// Validated constructor; columns must be nondecreasing and inside `(0, 2π)`.
    pub fn new(m_eta: usize, omega: OmegaGrid<T>, phi: Vec<T>) -> Result<Self> {
        let q = Self::unchecked(m_eta, omega, phi)?;
        q.check_invariants()?;
        Ok(q)
    }

    pub(crate) fn unchecked(m_eta: usize, omega: OmegaGrid<T>, phi: Vec<T>) -> Result<Self> {
        if m_eta == 0 {
            return Err(Error::InvalidParameter("quantile lattice needs M_eta >= 1".into()));
        }
        if phi.len() != m_eta * omega.len() {
            return Err(Error::LatticeMismatch(format!(
                "expected {} samples, got {}",
                m_eta * omega.len(),
                phi.len()
            )));
        }
        Ok(Self {
            m_eta,
            fractions: eta_fractions(m_eta),
            omega,
            phi,
            time: T::zero(),
        })
    }

    /// Inverts the per-fiber CDFs of `f` at the fractions `s_j`.
    pub fn from_density(f: &GridDensity<T>, m_eta: usize) -> Result<Self> {
        let fractions = eta_fractions::<T>(m_eta);
        let mut phi = Vec::with_capacity(m_eta * f.omega().len());
        for k in 0..f.omega().len() {
            let cdf = build_cdf(f, k)?;
            let total = cdf.total();
            for &s in &fractions {
                phi.push(cdf.quantile(s * total)?);
            }
        }
        let mut q = Self::new(m_eta, f.omega().clone(), phi)?;
        q.time = f.time;
        Ok(q)
    }

    /// Encodes a uniform-weight ensemble whose frequencies sit on `omega`.
    ///
    /// Every fiber must hold the same number of oscillators `M_η`, and the
    /// fiber masses must equal `M_η / N`.
    pub fn from_ensemble(e: &PhaseEnsemble<T>, omega: &OmegaGrid<T>) -> Result<Self> {
        let n = e.len();
        let scale = omega
            .nodes
            .iter()
            .fold(T::one(), |acc, w| acc.max(w.abs()));
        let tol = T::epsilon() * cast(64.0) * scale;
        let mut columns: Vec<Vec<T>> = vec![Vec::new(); omega.len()];
        for (&th, &w) in e.theta.iter().zip(&e.omega) {
            let k = omega.locate(w, tol).ok_or_else(|| {
                Error::LatticeMismatch(format!("frequency {} is not a grid node", as_f64(w)))
            })?;
            columns[k].push(th);
        }
        let m_eta = columns[0].len();
        if columns.iter().any(|c| c.len() != m_eta) || m_eta == 0 {
            return Err(Error::LatticeMismatch(
                "fibers hold different numbers of oscillators".into(),
            ));
        }
        let per_atom = T::one() / count(n);
        let mass_tol = cast::<T>(1e-12).max(T::epsilon() * cast(16.0));
        for k in 0..omega.len() {
            let w = omega.fiber_mass(k) / count(m_eta);
            if (w - per_atom).abs() > mass_tol {
                return Err(Error::LatticeMismatch(format!(
                    "fiber {k} weight {} differs from 1/N",
                    as_f64(w)
                )));
            }
        }
        let mut phi = Vec::with_capacity(n);
        for mut c in columns {
            c.sort_by(|a, b| a.partial_cmp(b).expect("finite phases"));
            phi.extend(c);
        }
        let mut q = Self::new(m_eta, omega.clone(), phi)?;
        q.time = e.time;
        Ok(q)
    }

    /// Fiber-major list of oscillators `(φ_{j,k}, Ω_k)`.
    pub fn to_ensemble(&self) -> PhaseEnsemble<T> {
        let mut omega = Vec::with_capacity(self.phi.len());
        for k in 0..self.omega.len() {
            omega.extend(std::iter::repeat_n(self.omega.nodes[k], self.m_eta));
        }
        PhaseEnsemble::from_parts(self.phi.clone(), omega, self.time)
    }

    pub fn check_invariants(&self) -> Result<()> {
        let tau = two_pi::<T>();
        for k in 0..self.omega.len() {
            let col = self.column(k);
            for (j, &v) in col.iter().enumerate() {
                if !(v > T::zero() && v < tau) {
                    return Err(Error::SupportEscape {
                        fiber: k,
                        value: as_f64(v),
                    });
                }
                if j > 0 && v < col[j - 1] {
                    return Err(Error::MonotonicityLoss { fiber: k, sample: j });
                }
            }
        }
        Ok(())
    }

    pub fn m_eta(&self) -> usize {
        self.m_eta
    }

    pub fn fractions(&self) -> &[T] {
        &self.fractions
    }

    pub fn omega(&self) -> &OmegaGrid<T> {
        &self.omega
    }

    pub fn phi(&self) -> &[T] {
        &self.phi
    }

    pub(crate) fn phi_mut(&mut self) -> &mut [T] {
        &mut self.phi
    }

    pub fn column(&self, k: usize) -> &[T] {
        &self.phi[k * self.m_eta..(k + 1) * self.m_eta]
    }

    #[inline]
    pub fn at(&self, j: usize, k: usize) -> T {
        self.phi[k * self.m_eta + j]
    }

    /// Quadrature weight `g(Ω_k) ΔΩ_k / M_η` of every sample in fiber `k`.
    #[inline]
    pub fn weight(&self, k: usize) -> T {
        self.omega.fiber_mass(k) / count(self.m_eta)
    }

    pub fn total_weight(&self) -> T {
        tree_sum_by(0..self.omega.len(), |k| self.weight(k) * count(self.m_eta))
    }

    /// `Σ w_{j,k} φ_{j,k}`, the θ-mean of the represented measure.
    pub fn theta_mean(&self) -> T {
        tree_sum_by(0..self.omega.len(), |k| {
            self.weight(k) * tree_sum_by(self.column(k).iter(), |&v| v)
        })
    }

    /// `Σ_k (Σ_j w_{j,k}) Ω_k`.
    pub fn omega_mean(&self) -> T {
        self.omega.first_moment()
    }

    /// `φ(0, Ω_k)`, extrapolated linearly from the first two samples.
    pub fn lower_endpoint(&self, k: usize) -> T {
        let c = self.column(k);
        if c.len() < 2 {
            return c[0];
        }
        c[0] - (c[1] - c[0]) * cast(0.5)
    }

    /// `φ(g(Ω_k), Ω_k)`, extrapolated linearly from the last two samples.
    pub fn upper_endpoint(&self, k: usize) -> T {
        let c = self.column(k);
        let n = c.len();
        if n < 2 {
            return c[0];
        }
        c[n - 1] + (c[n - 1] - c[n - 2]) * cast(0.5)
    }

    /// Fibers carrying positive mass.
    pub fn occupied_fibers(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.omega.len()).filter(move |&k| self.omega.fiber_mass(k) > T::zero())
    }

    pub fn same_lattice(&self, other: &Self) -> bool {
        self.m_eta == other.m_eta && self.omega == other.omega
    }

    /// Shifts every quantile by `shift`.
    pub fn translated(&self, shift: T) -> Result<Self> {
        let phi = self.phi.iter().map(|&v| v + shift).collect();
        let mut q = Self::new(self.m_eta, self.omega.clone(), phi)?;
        q.time = self.time;
        Ok(q)
    }

    /// Monotone piecewise-linear resampling onto `m_eta` fractions.
    ///
    /// Values beyond the outermost samples use the endpoint extrapolation of
    /// [`QuantileField::lower_endpoint`] and [`QuantileField::upper_endpoint`].
    pub fn resampled(&self, m_eta: usize) -> Result<Self> {
        let target = eta_fractions::<T>(m_eta);
        let mut phi = Vec::with_capacity(m_eta * self.omega.len());
        for k in 0..self.omega.len() {
            let col = self.column(k);
            let mut xs = Vec::with_capacity(col.len() + 2);
            let mut ys = Vec::with_capacity(col.len() + 2);
            xs.push(T::zero());
            ys.push(self.lower_endpoint(k));
            xs.extend_from_slice(&self.fractions);
            ys.extend_from_slice(col);
            xs.push(T::one());
            ys.push(self.upper_endpoint(k));
            for &s in &target {
                let i = xs.partition_point(|&x| x <= s).clamp(1, xs.len() - 1);
                let t = (s - xs[i - 1]) / (xs[i] - xs[i - 1]);
                phi.push(ys[i - 1] + (ys[i] - ys[i - 1]) * t);
            }
        }
        let mut q = Self::new(m_eta, self.omega.clone(), phi)?;
        q.time = self.time;
        Ok(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::density::FrequencyDensity;
    use std::f64::consts::PI;

    #[test]
    fn fractions_are_cell_midpoints() {
        assert_eq!(eta_fractions::<f64>(4), vec![0.125, 0.375, 0.625, 0.875]);
    }

    #[test]
    fn weights_sum_to_one() {
        let g = FrequencyDensity::<f64>::uniform(0.5, 32).unwrap();
        // indicator of [40Δθ, 88Δθ], aligned with cell edges
        let dtheta = 2.0 * PI / 128.0;
        let (a, b) = (40.0 * dtheta, 88.0 * dtheta);
        let f = GridDensity::from_profile(128, &g, |th, _| {
            if th > a && th < b {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        let q = QuantileField::from_density(&f, 64).unwrap();
        assert!((q.total_weight() - 1.0).abs() < 1e-12);
        assert!((q.lower_endpoint(3) - a).abs() < 1e-12);
        assert!((q.upper_endpoint(3) - b).abs() < 1e-12);
    }

    #[test]
    fn rejects_crossing_and_escaping_samples() {
        let g = FrequencyDensity::<f64>::identical();
        let err = QuantileField::new(3, g.grid().clone(), vec![1.0, 0.5, 2.0]).unwrap_err();
        assert!(matches!(err, Error::MonotonicityLoss { fiber: 0, sample: 1 }));
        let err = QuantileField::new(2, g.grid().clone(), vec![0.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::SupportEscape { .. }));
        let err = QuantileField::new(2, g.grid().clone(), vec![1.0, 7.0]).unwrap_err();
        assert!(matches!(err, Error::SupportEscape { .. }));
    }

    #[test]
    fn ensemble_round_trip() {
        let g = FrequencyDensity::<f64>::atoms(vec![(-0.5, 0.5), (0.5, 0.5)]).unwrap();
        let e = PhaseEnsemble::new(vec![3.0, 1.0, 2.0, 2.5], vec![0.5, -0.5, -0.5, 0.5]).unwrap();
        let q = QuantileField::from_ensemble(&e, g.grid()).unwrap();
        assert_eq!(q.column(0), &[1.0, 2.0]);
        assert_eq!(q.column(1), &[2.5, 3.0]);
        let back = q.to_ensemble();
        assert_eq!(back.theta, vec![1.0, 2.0, 2.5, 3.0]);
        assert_eq!(back.omega, vec![-0.5, -0.5, 0.5, 0.5]);
    }

    #[test]
    fn unbalanced_ensembles_are_rejected() {
        let g = FrequencyDensity::<f64>::atoms(vec![(-0.5, 0.5), (0.5, 0.5)]).unwrap();
        let e = PhaseEnsemble::new(vec![3.0, 1.0, 2.0], vec![0.5, -0.5, -0.5]).unwrap();
        assert!(matches!(
            QuantileField::from_ensemble(&e, g.grid()),
            Err(Error::LatticeMismatch(_))
        ));
    }

    #[test]
    fn resampling_linear_columns_is_exact() {
        let g = FrequencyDensity::<f64>::identical();
        let phi: Vec<f64> = eta_fractions::<f64>(8).iter().map(|s| 2.0 + s).collect();
        let q = QuantileField::new(8, g.grid().clone(), phi).unwrap();
        let r = q.resampled(20).unwrap();
        for (v, s) in r.column(0).iter().zip(r.fractions()) {
            assert!((v - (2.0 + s)).abs() < 1e-14);
        }
    }
}
