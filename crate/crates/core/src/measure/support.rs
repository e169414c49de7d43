//! Bounding boxes of θ- and Ω-projections of supports.

use super::ensemble::EmpiricalMeasure;
use super::field::QuantileField;
use super::grid::GridDensity;
use crate::error::{Error, Result};
use crate::scalar::{cast, Scalar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupportBox<T> {
    pub theta_min: T,
    pub theta_max: T,
    pub omega_min: T,
    pub omega_max: T,
}

impl<T: Scalar> SupportBox<T> {
    /// `D_θ`.
    pub fn theta_diameter(&self) -> T {
        self.theta_max - self.theta_min
    }

    /// `D_Ω`.
    pub fn omega_diameter(&self) -> T {
        self.omega_max - self.omega_min
    }

    fn point(theta: T, omega: T) -> Self {
        Self {
            theta_min: theta,
            theta_max: theta,
            omega_min: omega,
            omega_max: omega,
        }
    }

    fn include(&mut self, theta: T, omega: T) {
        self.theta_min = self.theta_min.min(theta);
        self.theta_max = self.theta_max.max(theta);
        self.omega_min = self.omega_min.min(omega);
        self.omega_max = self.omega_max.max(omega);
    }
}

/// Default relative floor for grid supports.
pub fn default_mass_floor<T: Scalar>() -> T {
    cast(1e-12)
}

/// Measures with a computable support box.
pub trait Support<T: Scalar> {
    /// Tight box around the support. For grid densities, cells whose value
    /// is at most `mass_floor` times the peak value are ignored and the box
    /// spans the surviving cell centers. Other representations ignore the
    /// floor.
    fn support_box(&self, mass_floor: T) -> Result<SupportBox<T>>;
}

impl<T: Scalar> Support<T> for EmpiricalMeasure<T> {
    fn support_box(&self, _mass_floor: T) -> Result<SupportBox<T>> {
        let mut atoms = self.atoms().iter();
        let first = atoms.next().ok_or(Error::EmptyMeasure)?;
        let mut b = SupportBox::point(first.theta, first.omega);
        for a in atoms {
            b.include(a.theta, a.omega);
        }
        Ok(b)
    }
}

impl<T: Scalar> Support<T> for QuantileField<T> {
    /// θ-extent from the endpoint quantiles `φ(0, Ω_k)` and `φ(g(Ω_k), Ω_k)`.
    fn support_box(&self, _mass_floor: T) -> Result<SupportBox<T>> {
        let mut fibers = self.occupied_fibers();
        let first = fibers.next().ok_or(Error::EmptyMeasure)?;
        let w = self.omega().nodes[first];
        let mut b = SupportBox::point(self.lower_endpoint(first), w);
        b.include(self.upper_endpoint(first), w);
        for k in fibers {
            let w = self.omega().nodes[k];
            b.include(self.lower_endpoint(k), w);
            b.include(self.upper_endpoint(k), w);
        }
        Ok(b)
    }
}

impl<T: Scalar> Support<T> for GridDensity<T> {
    fn support_box(&self, mass_floor: T) -> Result<SupportBox<T>> {
        if mass_floor < T::zero() {
            return Err(Error::InvalidParameter("mass floor must be nonnegative".into()));
        }
        let peak = self.values().iter().fold(T::zero(), |a, &v| a.max(v));
        if !(peak > T::zero()) {
            return Err(Error::EmptyMeasure);
        }
        let cut = peak * mass_floor;
        let mut b: Option<SupportBox<T>> = None;
        for k in 0..self.omega().len() {
            let w = self.omega().nodes[k];
            for m in 0..self.m_theta() {
                if self.at(m, k) > cut {
                    let th = self.theta_center(m);
                    match b.as_mut() {
                        Some(b) => b.include(th, w),
                        None => b = Some(SupportBox::point(th, w)),
                    }
                }
            }
        }
        b.ok_or(Error::EmptyMeasure)
    }
}
