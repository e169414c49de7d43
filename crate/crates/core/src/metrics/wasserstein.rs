//! Quantile-based transport distances on a shared `(η, Ω)` lattice.

use crate::error::{Error, Result};
use crate::measure::QuantileField;
use crate::scalar::{as_f64, count, tree_sum_by, Scalar};

fn check_order<T: Scalar>(p: T) -> Result<()> {
    if !(p >= T::one()) {
        return Err(Error::InvalidParameter(format!(
            "order p = {} must be >= 1",
            as_f64(p)
        )));
    }
    Ok(())
}

fn check_lattice<T: Scalar>(a: &QuantileField<T>, b: &QuantileField<T>) -> Result<()> {
    if !a.same_lattice(b) {
        return Err(Error::LatticeMismatch(format!(
            "({} x {}) vs ({} x {})",
            a.m_eta(),
            a.omega().len(),
            b.m_eta(),
            b.omega().len()
        )));
    }
    Ok(())
}

/// `Σ_j (g_k/M_η) (|Δ_j| / scale)^p`; dividing by the largest gap keeps
/// large orders from overflowing.
fn fiber_power<T: Scalar>(a: &QuantileField<T>, b: &QuantileField<T>, k: usize, p: T, scale: T) -> T {
    let unit = a.omega().density[k] / count(a.m_eta());
    let ca = a.column(k);
    let cb = b.column(k);
    unit * tree_sum_by(0..ca.len(), |j| ((ca[j] - cb[j]).abs() / scale).powf(p))
}

fn fiber_sup<T: Scalar>(a: &QuantileField<T>, b: &QuantileField<T>, k: usize) -> T {
    a.column(k)
        .iter()
        .zip(b.column(k))
        .fold(T::zero(), |m, (x, y)| m.max((*x - *y).abs()))
}

/// `W_p` on fiber `k`: the `L^p(0, g(Ω_k))` distance of the two quantile
/// columns. `p = ∞` takes the largest gap.
pub fn wasserstein_p_fiber<T: Scalar>(
    a: &QuantileField<T>,
    b: &QuantileField<T>,
    k: usize,
    p: T,
) -> Result<T> {
    check_order(p)?;
    check_lattice(a, b)?;
    if k >= a.omega().len() {
        return Err(Error::InvalidParameter(format!("fiber {k} out of range")));
    }
    let sup = fiber_sup(a, b, k);
    if p.is_infinite() || sup == T::zero() {
        return Ok(sup);
    }
    Ok(sup * fiber_power(a, b, k, p, sup).powf(p.recip()))
}

/// `W_p` for every fiber.
pub fn fiber_distances<T: Scalar>(a: &QuantileField<T>, b: &QuantileField<T>, p: T) -> Result<Vec<T>> {
    (0..a.omega().len())
        .map(|k| wasserstein_p_fiber(a, b, k, p))
        .collect()
}

/// `W̃_p = (Σ_k ΔΩ_k W_p(Ω_k)^p)^{1/p}`; for `p = ∞` the largest fiber
/// distance over fibers carrying mass.
pub fn modified_wp<T: Scalar>(a: &QuantileField<T>, b: &QuantileField<T>, p: T) -> Result<T> {
    check_order(p)?;
    check_lattice(a, b)?;
    let sup = a
        .occupied_fibers()
        .fold(T::zero(), |m, k| m.max(fiber_sup(a, b, k)));
    if p.is_infinite() || sup == T::zero() {
        return Ok(sup);
    }
    let widths = &a.omega().widths;
    let sum = tree_sum_by(0..widths.len(), |k| widths[k] * fiber_power(a, b, k, p, sup));
    Ok(sup * sum.powf(p.recip()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{FrequencyDensity, OmegaGrid};

    fn field(grid: &OmegaGrid<f64>, m: usize, f: impl Fn(usize, usize) -> f64) -> QuantileField<f64> {
        let phi = (0..grid.len()).flat_map(|k| (0..m).map(move |j| (k, j))).map(|(k, j)| f(j, k)).collect();
        QuantileField::new(m, grid.clone(), phi).unwrap()
    }

    #[test]
    fn identical_fields_are_at_zero_distance() {
        let g = FrequencyDensity::<f64>::uniform(0.5, 4).unwrap();
        let a = field(g.grid(), 8, |j, k| 1.0 + 0.1 * j as f64 + 0.01 * k as f64);
        for p in [1.0, 2.0, 7.0, f64::INFINITY] {
            assert_eq!(modified_wp(&a, &a, p).unwrap(), 0.0);
        }
    }

    #[test]
    fn unit_fiber_shift() {
        let grid = OmegaGrid::new(vec![0.0], vec![1.0], vec![1.0]).unwrap();
        let a = field(&grid, 10, |j, _| 1.0 + 0.2 * j as f64);
        let b = a.translated(0.3).unwrap();
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert!((wasserstein_p_fiber(&a, &b, 0, p).unwrap() - 0.3).abs() < 1e-14);
        }
    }

    #[test]
    fn dirac_fibers() {
        let grid = OmegaGrid::new(vec![0.0], vec![1.0], vec![0.4]).unwrap();
        let a = field(&grid, 5, |_, _| 1.0);
        let b = field(&grid, 5, |_, _| 2.5);
        for p in [1.0, 2.0, 3.0] {
            let expect = 1.5 * 0.4f64.powf(1.0 / p);
            assert!((wasserstein_p_fiber(&a, &b, 0, p).unwrap() - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn uniform_shift_scales_with_total_mass() {
        let g = FrequencyDensity::<f64>::tent(1.0, 6).unwrap();
        let a = field(g.grid(), 16, |j, _| 2.0 + 0.1 * j as f64);
        let b = a.translated(0.25).unwrap();
        let mass: f64 = g.grid().total_mass();
        for p in [1.0, 2.0, 4.0] {
            let expect = 0.25 * mass.powf(1.0 / p);
            assert!((modified_wp(&a, &b, p).unwrap() - expect).abs() < 1e-13);
        }
    }

    #[test]
    fn lattice_must_agree() {
        let g = FrequencyDensity::<f64>::uniform(0.5, 2).unwrap();
        let a = field(g.grid(), 4, |j, _| 1.0 + j as f64 * 0.1);
        let b = field(g.grid(), 5, |j, _| 1.0 + j as f64 * 0.1);
        assert!(matches!(modified_wp(&a, &b, 1.0), Err(Error::LatticeMismatch(_))));
        assert!(modified_wp(&a, &a, 0.5).is_err());
    }
}
