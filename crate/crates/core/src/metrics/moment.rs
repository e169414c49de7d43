//! First absolute θ-moment about a centre, the upper bound for the
//! bounded-Lipschitz distance to `δ_{θ_c} ⊗ δ_0`.

use crate::measure::{EmpiricalMeasure, GridDensity, PhaseEnsemble, QuantileField};
use crate::scalar::{count, tree_sum_by, Scalar};

pub trait PhaseMoment<T: Scalar> {
    /// `∫ |θ − centre| dμ`.
    fn abs_moment(&self, centre: T) -> T;
}

impl<T: Scalar> PhaseMoment<T> for EmpiricalMeasure<T> {
    fn abs_moment(&self, centre: T) -> T {
        tree_sum_by(self.atoms().iter(), |a| a.weight * (a.theta - centre).abs())
    }
}

impl<T: Scalar> PhaseMoment<T> for PhaseEnsemble<T> {
    fn abs_moment(&self, centre: T) -> T {
        tree_sum_by(self.theta.iter(), |&th| (th - centre).abs()) / count(self.len().max(1))
    }
}

impl<T: Scalar> PhaseMoment<T> for GridDensity<T> {
    fn abs_moment(&self, centre: T) -> T {
        let mt = self.m_theta();
        tree_sum_by(0..self.omega().len(), |k| {
            tree_sum_by(0..mt, |m| self.cell_mass(m, k) * (self.theta_center(m) - centre).abs())
        })
    }
}

impl<T: Scalar> PhaseMoment<T> for QuantileField<T> {
    fn abs_moment(&self, centre: T) -> T {
        tree_sum_by(0..self.omega().len(), |k| {
            self.weight(k) * tree_sum_by(self.column(k).iter(), |&v| (v - centre).abs())
        })
    }
}

/// `∫ |θ − θ_c| dμ̄` for a unit-mass state.
pub fn bl_distance_upper<T: Scalar, M: PhaseMoment<T> + ?Sized>(m: &M, centre: T) -> T {
    m.abs_moment(centre)
}
