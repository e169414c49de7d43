//! Kuramoto oscillators and the kinetic Kuramoto equation.
//!
//! Three discretisations of the same dynamics live here: the N-oscillator
//! ODE ([`particle`]), the quantile (pseudo-inverse) form of the kinetic
//! equation ([`quantile`]) and an upwind finite-volume scheme for its
//! conservation-law form ([`fvsolver`]). [`metrics`] holds the transport
//! distances used to compare them.
//!
//! Everything is generic over the [`Scalar`] type; the `*64` aliases below
//! fix it to `f64`.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fvsolver;
pub mod io;
pub mod measure;
pub mod metrics;
pub mod particle;
pub mod quantile;
pub mod scalar;

pub use error::{Error, Result};
pub use fvsolver::{fv_simulate, fv_step, stable_dt, velocity_field, FvState};
pub use measure::{
    build_cdf, default_mass_floor, dirac_comb_from_density, ensemble_to_empirical, eta_fractions,
    pseudo_inverse, Atom, CdfTable, EmpiricalMeasure, FrequencyDensity, GridDensity, OmegaGrid,
    PhaseEnsemble, Profile, QuantileField, Support, SupportBox,
};
pub use particle::{
    critical_coupling, freq_diameter, kuramoto_rhs, kuramoto_rhs_pairwise, order_parameter,
    phase_diameter, simulate, step_rk4, trapping_estimates, ParticleParams, TrajectoryRecord,
    TrappingEstimate,
};
pub use quantile::{
    density_from_quantile, evolve, field_diameter, phi_rhs, phi_rhs_pairwise, KineticParams,
    QuantileTrajectory,
};
pub use scalar::{tree_sum, Scalar};

pub type FrequencyDensity64 = FrequencyDensity<f64>;
pub type OmegaGrid64 = OmegaGrid<f64>;
pub type PhaseEnsemble64 = PhaseEnsemble<f64>;
pub type EmpiricalMeasure64 = EmpiricalMeasure<f64>;
pub type GridDensity64 = GridDensity<f64>;
pub type QuantileField64 = QuantileField<f64>;
pub type SupportBox64 = SupportBox<f64>;
pub type ParticleParams64 = ParticleParams<f64>;
pub type KineticParams64 = KineticParams<f64>;
pub type TrajectoryRecord64 = TrajectoryRecord<f64>;
pub type QuantileTrajectory64 = QuantileTrajectory<f64>;
pub type FvState64 = FvState<f64>;
