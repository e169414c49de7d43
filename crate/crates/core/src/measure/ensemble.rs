//! Oscillator ensembles and their empirical measures.

use crate::error::{Error, Result};
use crate::scalar::{as_f64, count, tree_sum, two_pi, Scalar};

/// `N` oscillator states `(θ_i, Ω_i)` at time `t`.
///
/// Phases are kept on the lift to ℝ while integrating; [`PhaseEnsemble::wrapped`]
/// maps them back to `[0, 2π)` for output.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseEnsemble<T> {
    pub theta: Vec<T>,
    pub omega: Vec<T>,
    pub time: T,
}

impl<T: Scalar> PhaseEnsemble<T> {
    /// Validated constructor: equal lengths, `N ≥ 1`, phases in `[0, 2π)`.
    pub fn new(theta: Vec<T>, omega: Vec<T>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::InvalidParameter("ensemble needs at least one oscillator".into()));
        }
        if theta.len() != omega.len() {
            return Err(Error::InvalidParameter(format!(
                "{} phases but {} frequencies",
                theta.len(),
                omega.len()
            )));
        }
        let tau = two_pi::<T>();
        if let Some(&th) = theta
            .iter()
            .find(|&&th| !(th >= T::zero() && th < tau))
        {
            return Err(Error::InvalidParameter(format!(
                "phase {} outside [0, 2pi)",
                as_f64(th)
            )));
        }
        if omega.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter("non-finite frequency".into()));
        }
        Ok(Self {
            theta,
            omega,
            time: T::zero(),
        })
    }

    /// Identical oscillators (`Ω ≡ 0`).
    pub fn identical(theta: Vec<T>) -> Result<Self> {
        let n = theta.len();
        Self::new(theta, vec![T::zero(); n])
    }

    pub(crate) fn from_parts(theta: Vec<T>, omega: Vec<T>, time: T) -> Self {
        Self { theta, omega, time }
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// Copy with every phase reduced to `[0, 2π)`.
    pub fn wrapped(&self) -> Self {
        let tau = two_pi::<T>();
        let theta = self
            .theta
            .iter()
            .map(|&th| {
                let r = th % tau;
                let r = if r < T::zero() { r + tau } else { r };
                if r >= tau {
                    T::zero()
                } else {
                    r
                }
            })
            .collect();
        Self {
            theta,
            omega: self.omega.clone(),
            time: self.time,
        }
    }

    /// `(1/N) Σ θ_i` on the lift.
    pub fn mean_phase(&self) -> T {
        tree_sum(&self.theta) / count(self.len())
    }

    /// `(1/N) Σ Ω_i`.
    pub fn mean_frequency(&self) -> T {
        tree_sum(&self.omega) / count(self.len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom<T> {
    pub theta: T,
    pub omega: T,
    pub weight: T,
}

/// Weighted Dirac comb on `[0, 2π) × ℝ`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure<T> {
    atoms: Vec<Atom<T>>,
    total_mass: T,
}

impl<T: Scalar> EmpiricalMeasure<T> {
    pub fn new(atoms: Vec<Atom<T>>) -> Result<Self> {
        if let Some((index, a)) = atoms
            .iter()
            .enumerate()
            .find(|(_, a)| !(a.weight > T::zero()))
        {
            return Err(Error::NegativeDensity {
                index,
                value: as_f64(a.weight),
            });
        }
        let weights: Vec<T> = atoms.iter().map(|a| a.weight).collect();
        let total_mass = tree_sum(&weights);
        Ok(Self { atoms, total_mass })
    }

    /// Uniform-weight comb over the ensemble, one atom per oscillator.
    pub fn from_ensemble(e: &PhaseEnsemble<T>) -> Self {
        let w = T::one() / count(e.len());
        let atoms = e
            .theta
            .iter()
            .zip(&e.omega)
            .map(|(&theta, &omega)| Atom {
                theta,
                omega,
                weight: w,
            })
            .collect();
        Self::new(atoms).expect("positive uniform weights")
    }

    pub fn atoms(&self) -> &[Atom<T>] {
        &self.atoms
    }

    pub fn total_mass(&self) -> T {
        self.total_mass
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// `true` when all weights equal `1/N`.
    pub fn has_uniform_weights(&self, tol: T) -> bool {
        let w = T::one() / count(self.len().max(1));
        self.atoms.iter().all(|a| (a.weight - w).abs() <= tol)
    }

    /// Splits every atom into `factor` copies of equal weight.
    pub fn refined(&self, factor: usize) -> Self {
        let f = count::<T>(factor.max(1));
        let atoms = self
            .atoms
            .iter()
            .flat_map(|a| {
                std::iter::repeat_n(Atom {
                    weight: a.weight / f,
                    ..*a
                }, factor.max(1))
            })
            .collect();
        Self::new(atoms).expect("refinement keeps weights positive")
    }
}

/// One atom per oscillator, each of weight `1/N`.
pub fn ensemble_to_empirical<T: Scalar>(e: &PhaseEnsemble<T>) -> EmpiricalMeasure<T> {
    EmpiricalMeasure::from_ensemble(e)
}
