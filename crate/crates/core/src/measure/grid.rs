//! Tensor-grid densities `f(θ_m, Ω_k)`, their per-fiber CDFs and
//! pseudo-inverses, and Dirac-comb sampling.

use super::density::{FrequencyDensity, OmegaGrid};
use super::ensemble::PhaseEnsemble;
use crate::error::{Error, Result};
use crate::scalar::{as_f64, cast, count, tree_sum, tree_sum_by, two_pi, Scalar};

/// `f(θ_m, Ω_k)` on `M_θ` uniform cells of `[0, 2π)` times an Ω-grid.
///
/// Values are stored fiber-major: `values[k * M_θ + m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity<T> {
    m_theta: usize,
    omega: OmegaGrid<T>,
    values: Vec<T>,
    pub time: T,
}

impl<T: Scalar> GridDensity<T> {
    pub fn new(m_theta: usize, omega: OmegaGrid<T>, values: Vec<T>) -> Result<Self> {
        if m_theta == 0 {
            return Err(Error::InvalidParameter("theta grid needs at least one cell".into()));
        }
        if values.len() != m_theta * omega.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} values, got {}",
                m_theta * omega.len(),
                values.len()
            )));
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= T::zero()) || !v.is_finite())
        {
            return Err(Error::NegativeDensity {
                index,
                value: as_f64(value),
            });
        }
        Ok(Self {
            m_theta,
            omega,
            values,
            time: T::zero(),
        })
    }

    /// Samples an unnormalized θ-profile per fiber and rescales each fiber so
    /// that its θ-marginal equals `g(Ω_k)`.
    ///
    /// Cell values are averages over 16 sub-samples of each cell.
    pub fn from_profile<F>(m_theta: usize, g: &FrequencyDensity<T>, profile: F) -> Result<Self>
    where
        F: Fn(T, T) -> T,
    {
        let omega = g.grid().clone();
        let dtheta = two_pi::<T>() / count(m_theta);
        const SUB: usize = 16;
        let mut values = Vec::with_capacity(m_theta * omega.len());
        for k in 0..omega.len() {
            let w = omega.nodes[k];
            let start = values.len();
            for m in 0..m_theta {
                let lo = dtheta * count(m);
                let avg = tree_sum_by(0..SUB, |s| {
                    let th = lo + dtheta * (count::<T>(s) + cast(0.5)) / count(SUB);
                    profile(th, w).max(T::zero())
                }) / count(SUB);
                values.push(avg);
            }
            let mass = tree_sum(&values[start..]) * dtheta;
            if !(mass > T::zero()) {
                return Err(Error::EmptyMeasure);
            }
            let scale = omega.density[k] / mass;
            for v in &mut values[start..] {
                *v *= scale;
            }
        }
        Self::new(m_theta, omega, values)
    }

    pub fn m_theta(&self) -> usize {
        self.m_theta
    }

    pub fn dtheta(&self) -> T {
        two_pi::<T>() / count(self.m_theta)
    }

    /// Cell centers `(m + 1/2) Δθ`.
    pub fn theta_center(&self, m: usize) -> T {
        (count::<T>(m) + cast(0.5)) * self.dtheta()
    }

    pub fn theta_grid(&self) -> Vec<T> {
        (0..self.m_theta).map(|m| self.theta_center(m)).collect()
    }

    pub fn omega(&self) -> &OmegaGrid<T> {
        &self.omega
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn fiber(&self, k: usize) -> &[T] {
        &self.values[k * self.m_theta..(k + 1) * self.m_theta]
    }

    #[inline]
    pub fn at(&self, m: usize, k: usize) -> T {
        self.values[k * self.m_theta + m]
    }

    /// `∫ f(θ, Ω_k) dθ` by the midpoint rule.
    pub fn fiber_marginal(&self, k: usize) -> T {
        tree_sum(self.fiber(k)) * self.dtheta()
    }

    /// Largest deviation of a fiber marginal from `g(Ω_k)`.
    pub fn marginal_error(&self) -> T {
        (0..self.omega.len()).fold(T::zero(), |acc, k| {
            acc.max((self.fiber_marginal(k) - self.omega.density[k]).abs())
        })
    }

    pub fn total_mass(&self) -> T {
        tree_sum_by(0..self.omega.len(), |k| {
            self.fiber_marginal(k) * self.omega.widths[k]
        })
    }

    /// `⟨f, θ⟩` with cell-center abscissae.
    pub fn theta_mean(&self) -> T {
        let dtheta = self.dtheta();
        tree_sum_by(0..self.omega.len(), |k| {
            let row = tree_sum_by(0..self.m_theta, |m| self.theta_center(m) * self.at(m, k));
            row * dtheta * self.omega.widths[k]
        })
    }

    /// Mass per cell, `f Δθ ΔΩ`.
    pub fn cell_mass(&self, m: usize, k: usize) -> T {
        self.at(m, k) * self.dtheta() * self.omega.widths[k]
    }
}

/// `F(θ, Ω_k)` sampled at the `M_θ + 1` cell edges.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfTable<T> {
    pub edges: Vec<T>,
    pub values: Vec<T>,
}

impl<T: Scalar> CdfTable<T> {
    /// `F(2π) ≈ g(Ω_k)`.
    pub fn total(&self) -> T {
        *self.values.last().expect("table has at least two edges")
    }

    /// Piecewise-linear interpolation of `F`.
    pub fn eval(&self, theta: T) -> T {
        let n = self.edges.len() - 1;
        if theta <= self.edges[0] {
            return T::zero();
        }
        if theta >= self.edges[n] {
            return self.total();
        }
        let h = self.edges[1] - self.edges[0];
        let i = ((theta / h).floor().to_usize().unwrap_or(0)).min(n - 1);
        let frac = (theta - self.edges[i]) / h;
        self.values[i] + (self.values[i + 1] - self.values[i]) * frac
    }

    /// `inf { θ : F(θ) > level }` for the interpolated `F`.
    pub fn quantile(&self, level: T) -> Result<T> {
        let total = self.total();
        if !(level >= T::zero()) || level >= total {
            return Err(Error::EmptyLevelSet {
                level: as_f64(level),
                mass: as_f64(total),
            });
        }
        let i = self.values.partition_point(|&v| v <= level);
        // values[0] = 0 <= level, and level < total, so 1 <= i <= M_θ.
        let (f0, f1) = (self.values[i - 1], self.values[i]);
        let h = self.edges[i] - self.edges[i - 1];
        Ok(self.edges[i - 1] + h * (level - f0) / (f1 - f0))
    }

    /// [`CdfTable::quantile`] with levels at or above the total mapped to the
    /// right support edge; absorbs roundoff at fiber boundaries.
    pub(crate) fn quantile_clamped(&self, level: T) -> T {
        match self.quantile(level) {
            Ok(th) => th,
            Err(_) if level <= T::zero() => self.left_edge(),
            Err(_) => self.right_edge(),
        }
    }

    fn left_edge(&self) -> T {
        let i = self.values.partition_point(|&v| v <= T::zero());
        self.edges[i.saturating_sub(1).min(self.edges.len() - 1)]
    }

    fn right_edge(&self) -> T {
        let total = self.total();
        let i = self.values.partition_point(|&v| v < total);
        self.edges[i.min(self.edges.len() - 1)]
    }
}

/// Cumulative θ-integral of fiber `k`.
pub fn build_cdf<T: Scalar>(f: &GridDensity<T>, k: usize) -> Result<CdfTable<T>> {
    let m_theta = f.m_theta();
    let dtheta = f.dtheta();
    let row = f.fiber(k);
    if let Some((m, &v)) = row.iter().enumerate().find(|(_, v)| **v < T::zero()) {
        return Err(Error::NegativeDensity {
            index: k * m_theta + m,
            value: as_f64(v),
        });
    }
    let edges = (0..=m_theta).map(|m| dtheta * count(m)).collect();
    let mut values = Vec::with_capacity(m_theta + 1);
    let mut acc = T::zero();
    values.push(acc);
    for &v in row {
        acc += v * dtheta;
        values.push(acc);
    }
    Ok(CdfTable { edges, values })
}

/// Quantiles of `cdf` at levels `s_j · F(2π)`.
pub fn pseudo_inverse<T: Scalar>(cdf: &CdfTable<T>, fractions: &[T]) -> Result<Vec<T>> {
    let total = cdf.total();
    fractions.iter().map(|&s| cdf.quantile(s * total)).collect()
}

/// Stratified Dirac comb of `f` with `N` equal masses.
///
/// Atom `i` sits at joint quantile level `(i - 1/2)/N`: fibers are visited in
/// increasing Ω and the level is inverted within its fiber.
pub fn dirac_comb_from_density<T: Scalar>(f: &GridDensity<T>, n: usize) -> Result<PhaseEnsemble<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("comb needs at least one atom".into()));
    }
    let omega = f.omega();
    let cdfs = (0..omega.len())
        .map(|k| build_cdf(f, k))
        .collect::<Result<Vec<_>>>()?;
    let masses: Vec<T> = cdfs
        .iter()
        .zip(&omega.widths)
        .map(|(c, &w)| c.total() * w)
        .collect();
    let total = tree_sum(&masses);
    if !(total > T::zero()) {
        return Err(Error::EmptyMeasure);
    }
    let mut theta = Vec::with_capacity(n);
    let mut freq = Vec::with_capacity(n);
    let mut k = 0;
    let mut before = T::zero();
    for i in 0..n {
        let u = (count::<T>(i) + cast(0.5)) / count(n) * total;
        while k + 1 < masses.len() && u >= before + masses[k] {
            before += masses[k];
            k += 1;
        }
        let level = (u - before) / omega.widths[k];
        theta.push(cdfs[k].quantile_clamped(level));
        freq.push(omega.nodes[k]);
    }
    Ok(PhaseEnsemble::from_parts(theta, freq, f.time))
}
