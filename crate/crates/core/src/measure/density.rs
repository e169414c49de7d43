//! Natural-frequency laws and the Ω-grids derived from them.

use crate::error::{Error, Result};
use crate::scalar::{as_f64, cast, count, strictly_increasing, tree_sum_by, Scalar};

/// Ω nodes with midpoint-rule widths and density values.
///
/// Fiber `k` carries mass `density[k] * widths[k]`. Atomic laws use unit
/// widths, so the Ω-measure becomes counting measure and `density[k]` is the
/// atom mass.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaGrid<T> {
    pub nodes: Vec<T>,
    pub widths: Vec<T>,
    pub density: Vec<T>,
}

impl<T: Scalar> OmegaGrid<T> {
    pub fn new(nodes: Vec<T>, widths: Vec<T>, density: Vec<T>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidParameter("empty omega grid".into()));
        }
        if nodes.len() != widths.len() || nodes.len() != density.len() {
            return Err(Error::InvalidParameter(
                "omega grid vectors differ in length".into(),
            ));
        }
        if !strictly_increasing(&nodes) {
            return Err(Error::InvalidParameter(
                "omega nodes must be strictly increasing".into(),
            ));
        }
        if let Some(w) = widths.iter().find(|w| !(**w > T::zero())) {
            return Err(Error::InvalidParameter(format!(
                "omega widths must be positive, got {}",
                as_f64(*w)
            )));
        }
        if let Some((index, v)) = density.iter().enumerate().find(|(_, v)| **v < T::zero()) {
            return Err(Error::NegativeDensity {
                index,
                value: as_f64(*v),
            });
        }
        Ok(Self {
            nodes,
            widths,
            density,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    #[inline]
    pub fn fiber_mass(&self, k: usize) -> T {
        self.density[k] * self.widths[k]
    }

    pub fn fiber_masses(&self) -> Vec<T> {
        (0..self.len()).map(|k| self.fiber_mass(k)).collect()
    }

    pub fn total_mass(&self) -> T {
        tree_sum_by(0..self.len(), |k| self.fiber_mass(k))
    }

    /// Σ_k m_k Ω_k.
    pub fn first_moment(&self) -> T {
        tree_sum_by(0..self.len(), |k| self.fiber_mass(k) * self.nodes[k])
    }

    /// Extent of the nodes carrying positive mass.
    pub fn occupied_range(&self) -> Option<(T, T)> {
        let mut it = (0..self.len()).filter(|&k| self.fiber_mass(k) > T::zero());
        let first = it.next()?;
        let last = it.next_back().unwrap_or(first);
        Some((self.nodes[first], self.nodes[last]))
    }

    /// Index of the node equal to `omega` up to `tol`.
    pub fn locate(&self, omega: T, tol: T) -> Option<usize> {
        self.nodes.iter().position(|&w| (w - omega).abs() <= tol)
    }
}

/// Shape the density was built from; kept for pointwise evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile<T> {
    Uniform { radius: T },
    /// Piecewise-linear through `(Ω, g)` breakpoints, zero outside.
    Piecewise { breakpoints: Vec<(T, T)> },
    /// Finitely many atoms; there is no absolutely continuous part.
    Atoms,
}

/// A symmetric, mean-zero, compactly supported frequency law `g(Ω)`
/// discretized on a midpoint Ω-grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyDensity<T> {
    grid: OmegaGrid<T>,
    support_radius: T,
    profile: Profile<T>,
}

pub(crate) fn mass_tolerance<T: Scalar>() -> T {
    cast::<T>(1e-10).max(T::epsilon() * cast(1e3))
}

fn symmetric_nodes<T: Scalar>(radius: T, cells: usize) -> (Vec<T>, T) {
    let h = (radius + radius) / count(cells);
    let mut nodes: Vec<T> = (0..cells)
        .map(|k| -radius + (count::<T>(k) + cast(0.5)) * h)
        .collect();
    for k in 0..cells / 2 {
        nodes[cells - 1 - k] = -nodes[k];
    }
    if cells % 2 == 1 {
        nodes[cells / 2] = T::zero();
    }
    (nodes, h)
}

fn interp_piecewise<T: Scalar>(bp: &[(T, T)], x: T) -> T {
    let (x0, _) = bp[0];
    let (xn, _) = bp[bp.len() - 1];
    if x < x0 || x > xn {
        return T::zero();
    }
    for w in bp.windows(2) {
        let ((a, ga), (b, gb)) = (w[0], w[1]);
        if x >= a && x <= b {
            return ga + (gb - ga) * (x - a) / (b - a);
        }
    }
    T::zero()
}

/// Exact integral of the piecewise-linear profile over `[lo, hi]`.
fn integrate_piecewise<T: Scalar>(bp: &[(T, T)], lo: T, hi: T) -> T {
    let mut total = T::zero();
    let half = cast::<T>(0.5);
    for w in bp.windows(2) {
        let (a, b) = (w[0].0, w[1].0);
        let l = a.max(lo);
        let r = b.min(hi);
        if r > l {
            total += half * (interp_piecewise(bp, l) + interp_piecewise(bp, r)) * (r - l);
        }
    }
    total
}

impl<T: Scalar> FrequencyDensity<T> {
    /// `g = 1/(2C)` on `[-C, C]`, split into `cells` midpoint cells.
    pub fn uniform(radius: T, cells: usize) -> Result<Self> {
        if !radius.is_finite() {
            return Err(Error::UnboundedSupport(format!("radius {}", as_f64(radius))));
        }
        if !(radius > T::zero()) || cells == 0 {
            return Err(Error::InvalidParameter(
                "uniform law needs radius > 0 and at least one cell".into(),
            ));
        }
        let (nodes, h) = symmetric_nodes(radius, cells);
        let value = T::one() / (radius + radius);
        let grid = OmegaGrid::new(nodes, vec![h; cells], vec![value; cells])?;
        Self::checked(grid, radius, Profile::Uniform { radius })
    }

    /// Tent on `[-C, C]` with peak `1/C` at the origin.
    pub fn tent(radius: T, cells: usize) -> Result<Self> {
        Self::piecewise(
            vec![
                (-radius, T::zero()),
                (T::zero(), T::one() / radius),
                (radius, T::zero()),
            ],
            cells,
        )
    }

    /// Piecewise-linear law through `breakpoints`, zero outside their span.
    ///
    /// Cell values are exact cell averages, so the discrete mass equals the
    /// exact integral of the profile.
    pub fn piecewise(breakpoints: Vec<(T, T)>, cells: usize) -> Result<Self> {
        if breakpoints.len() < 2 || cells == 0 {
            return Err(Error::InvalidParameter(
                "piecewise law needs two breakpoints and one cell".into(),
            ));
        }
        if breakpoints
            .iter()
            .any(|(x, g)| !x.is_finite() || !g.is_finite())
        {
            return Err(Error::UnboundedSupport("non-finite breakpoint".into()));
        }
        let xs: Vec<T> = breakpoints.iter().map(|b| b.0).collect();
        if !strictly_increasing(&xs) {
            return Err(Error::InvalidParameter(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        if let Some((index, (_, g))) = breakpoints
            .iter()
            .enumerate()
            .find(|(_, (_, g))| *g < T::zero())
        {
            return Err(Error::NegativeDensity {
                index,
                value: as_f64(*g),
            });
        }
        let n = breakpoints.len();
        let scale = xs[0].abs().max(xs[n - 1].abs());
        let sym_tol = T::epsilon() * cast(16.0) * scale.max(T::one());
        let mut mismatch = T::zero();
        for i in 0..n {
            let (a, ga) = breakpoints[i];
            let (b, gb) = breakpoints[n - 1 - i];
            mismatch = mismatch.max((a + b).abs()).max((ga - gb).abs());
        }
        if mismatch > sym_tol {
            return Err(Error::AsymmetricDensity(as_f64(mismatch)));
        }
        let exact = integrate_piecewise(&breakpoints, xs[0], xs[n - 1]);
        if (exact - T::one()).abs() > mass_tolerance() {
            return Err(Error::NonUnitMass(as_f64(exact)));
        }
        let radius = scale;
        let (nodes, h) = symmetric_nodes(radius, cells);
        let density: Vec<T> = nodes
            .iter()
            .map(|&c| {
                let half = h * cast(0.5);
                integrate_piecewise(&breakpoints, c - half, c + half) / h
            })
            .collect();
        // Mirror so the discrete values are exactly symmetric.
        let mut density = density;
        for k in 0..cells / 2 {
            let avg = (density[k] + density[cells - 1 - k]) * cast(0.5);
            density[k] = avg;
            density[cells - 1 - k] = avg;
        }
        let grid = OmegaGrid::new(nodes, vec![h; cells], density)?;
        Self::checked(grid, radius, Profile::Piecewise { breakpoints })
    }

    /// Finitely many atoms `(Ω, mass)`.
    pub fn atoms(atoms: Vec<(T, T)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidParameter("no atoms given".into()));
        }
        if atoms.iter().any(|(w, m)| !w.is_finite() || !m.is_finite()) {
            return Err(Error::UnboundedSupport("non-finite atom".into()));
        }
        if let Some((index, (_, m))) = atoms
            .iter()
            .enumerate()
            .find(|(_, (_, m))| !(*m > T::zero()))
        {
            return Err(Error::NegativeDensity {
                index,
                value: as_f64(*m),
            });
        }
        let mut atoms = atoms;
        atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite atoms"));
        let n = atoms.len();
        let radius = atoms
            .iter()
            .fold(T::zero(), |acc, (w, _)| acc.max(w.abs()));
        let sym_tol = T::epsilon() * cast(16.0) * radius.max(T::one());
        let mut mismatch = T::zero();
        for i in 0..n {
            mismatch = mismatch
                .max((atoms[i].0 + atoms[n - 1 - i].0).abs())
                .max((atoms[i].1 - atoms[n - 1 - i].1).abs());
        }
        if mismatch > sym_tol {
            return Err(Error::AsymmetricDensity(as_f64(mismatch)));
        }
        let nodes: Vec<T> = atoms.iter().map(|a| a.0).collect();
        let density: Vec<T> = atoms.iter().map(|a| a.1).collect();
        let grid = OmegaGrid::new(nodes, vec![T::one(); n], density)?;
        Self::checked(grid, radius, Profile::Atoms)
    }

    /// All oscillators share `Ω = 0`.
    pub fn identical() -> Self {
        Self::atoms(vec![(T::zero(), T::one())]).expect("unit atom at the origin")
    }

    fn checked(grid: OmegaGrid<T>, support_radius: T, profile: Profile<T>) -> Result<Self> {
        let d = Self {
            grid,
            support_radius,
            profile,
        };
        d.validate()?;
        Ok(d)
    }

    /// Re-checks symmetry, unit mass, zero mean and compact support.
    pub fn validate(&self) -> Result<()> {
        let g = &self.grid;
        let n = g.len();
        let tol = T::epsilon() * cast(64.0) * self.support_radius.max(T::one());
        let mut mismatch = T::zero();
        for k in 0..n {
            mismatch = mismatch
                .max((g.nodes[k] + g.nodes[n - 1 - k]).abs())
                .max((g.fiber_mass(k) - g.fiber_mass(n - 1 - k)).abs());
        }
        if mismatch > tol {
            return Err(Error::AsymmetricDensity(as_f64(mismatch)));
        }
        let mass = g.total_mass();
        if (mass - T::one()).abs() > mass_tolerance() {
            return Err(Error::NonUnitMass(as_f64(mass)));
        }
        let mean = g.first_moment();
        if mean.abs() > mass_tolerance() {
            return Err(Error::AsymmetricDensity(as_f64(mean)));
        }
        if g.nodes.iter().any(|w| w.abs() > self.support_radius) {
            return Err(Error::UnboundedSupport(format!(
                "node outside [-{r}, {r}]",
                r = as_f64(self.support_radius)
            )));
        }
        Ok(())
    }

    pub fn grid(&self) -> &OmegaGrid<T> {
        &self.grid
    }

    pub fn omega_grid(&self) -> &[T] {
        &self.grid.nodes
    }

    pub fn values(&self) -> &[T] {
        &self.grid.density
    }

    pub fn support_radius(&self) -> T {
        self.support_radius
    }

    /// `D_Ω` of the law: the diameter of its support.
    pub fn support_diameter(&self) -> T {
        self.support_radius + self.support_radius
    }

    pub fn profile(&self) -> &Profile<T> {
        &self.profile
    }

    pub fn is_atomic(&self) -> bool {
        matches!(self.profile, Profile::Atoms)
    }

    /// Pointwise density; zero everywhere for atomic laws.
    pub fn value_at(&self, omega: T) -> T {
        match &self.profile {
            Profile::Uniform { radius } => {
                if omega.abs() <= *radius {
                    T::one() / (*radius + *radius)
                } else {
                    T::zero()
                }
            }
            Profile::Piecewise { breakpoints } => interp_piecewise(breakpoints, omega),
            Profile::Atoms => T::zero(),
        }
    }

    /// Midpoint quadrature `Σ_k h(Ω_k) g_k ΔΩ_k`.
    pub fn integrate<F: Fn(T) -> T>(&self, h: F) -> T {
        tree_sum_by(0..self.grid.len(), |k| {
            h(self.grid.nodes[k]) * self.grid.fiber_mass(k)
        })
    }

    /// The dilation `g_λ(Ω) = λ g(λΩ)` on the same number of cells.
    pub fn dilated(&self, lambda: T) -> Result<Self> {
        if !(lambda > T::zero()) {
            return Err(Error::InvalidParameter("dilation factor must be positive".into()));
        }
        match &self.profile {
            Profile::Uniform { radius } => Self::uniform(*radius / lambda, self.grid.len()),
            Profile::Piecewise { breakpoints } => Self::piecewise(
                breakpoints
                    .iter()
                    .map(|&(w, g)| (w / lambda, g * lambda))
                    .collect(),
                self.grid.len(),
            ),
            Profile::Atoms => Self::atoms(
                self.grid
                    .nodes
                    .iter()
                    .zip(&self.grid.density)
                    .map(|(&w, &m)| (w / lambda, m))
                    .collect(),
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_is_normalized_and_centered() {
        let g = FrequencyDensity::<f64>::uniform(1.0, 40).unwrap();
        assert!(g.values().iter().all(|&v| v == 0.5));
        assert!((g.integrate(|_| 1.0) - 1.0).abs() < 1e-12);
        assert!(g.integrate(|w| w).abs() < 1e-14);
        assert_eq!(g.support_diameter(), 2.0);
        let n = g.omega_grid().len();
        for k in 0..n {
            assert_eq!(g.omega_grid()[k], -g.omega_grid()[n - 1 - k]);
        }
    }

    #[test]
    fn two_point_law_has_zero_mean() {
        let g = FrequencyDensity::<f64>::atoms(vec![(0.5, 0.5), (-0.5, 0.5)]).unwrap();
        assert_eq!(g.omega_grid(), &[-0.5, 0.5]);
        assert_eq!(g.grid().first_moment(), 0.0);
        assert_eq!(g.support_diameter(), 1.0);
    }

    #[test]
    fn tent_mass_matches_trapezoid_oracle() {
        // Oracle: trapezoid rule on 10^4 intervals of the continuous tent.
        let tent = |w: f64| (1.0 - w.abs()).max(0.0);
        let n = 10_000;
        let h = 2.0 / n as f64;
        let mut trap = 0.5 * (tent(-1.0) + tent(1.0));
        for i in 1..n {
            trap += tent(-1.0 + i as f64 * h);
        }
        trap *= h;
        assert!((trap - 1.0).abs() < 1e-10);
        let g = FrequencyDensity::<f64>::tent(1.0, 64).unwrap();
        assert!((g.integrate(|_| 1.0) - trap).abs() < 1e-10);
        assert_eq!(g.value_at(0.0), 1.0);
    }

    #[test]
    fn odd_cell_counts_stay_symmetric() {
        let g = FrequencyDensity::<f64>::tent(0.7, 33).unwrap();
        assert_eq!(g.omega_grid()[16], 0.0);
        assert!(g.integrate(|w| w).abs() < 1e-15);
        assert!((g.integrate(|_| 1.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_asymmetric_atoms() {
        let err = FrequencyDensity::<f64>::atoms(vec![(-0.5, 0.4), (0.5, 0.6)]).unwrap_err();
        assert!(matches!(err, Error::AsymmetricDensity(_)));
        let err = FrequencyDensity::<f64>::atoms(vec![(-0.5, 0.5), (0.6, 0.5)]).unwrap_err();
        assert!(matches!(err, Error::AsymmetricDensity(_)));
    }

    #[test]
    fn rejects_unnormalized_input_without_rescaling() {
        let err = FrequencyDensity::<f64>::atoms(vec![(-0.5, 0.4), (0.5, 0.4)]).unwrap_err();
        assert!(matches!(err, Error::NonUnitMass(_)));
        let err =
            FrequencyDensity::<f64>::piecewise(vec![(-1.0, 0.0), (0.0, 2.0), (1.0, 0.0)], 8)
                .unwrap_err();
        assert!(matches!(err, Error::NonUnitMass(_)));
    }

    #[test]
    fn rejects_unbounded_or_skewed_tables() {
        let err = FrequencyDensity::<f64>::uniform(f64::INFINITY, 4).unwrap_err();
        assert!(matches!(err, Error::UnboundedSupport(_)));
        let err = FrequencyDensity::<f64>::piecewise(
            vec![(-1.0, 0.0), (0.2, 1.0), (1.0, 0.0)],
            8,
        )
        .unwrap_err();
        assert!(matches!(err, Error::AsymmetricDensity(_)));
    }

    #[test]
    fn dilation_rescales_support_and_peak() {
        let g = FrequencyDensity::<f64>::tent(1.0, 16).unwrap();
        let g2 = g.dilated(2.0).unwrap();
        assert_eq!(g2.support_radius(), 0.5);
        assert_eq!(g2.value_at(0.0), 2.0);
    }

    #[test]
    fn works_in_single_precision() {
        let g = FrequencyDensity::<f32>::uniform(0.5, 32).unwrap();
        assert!((g.integrate(|_| 1.0) - 1.0).abs() < 1e-5);
    }
}
