//! Domain types and conversions between density, CDF, quantile and
//! empirical views of a phase-frequency measure.

pub mod density;
pub mod ensemble;
pub mod field;
pub mod grid;
pub mod support;

pub use density::{FrequencyDensity, OmegaGrid, Profile};
pub use ensemble::{ensemble_to_empirical, Atom, EmpiricalMeasure, PhaseEnsemble};
pub use field::{eta_fractions, QuantileField};
pub use grid::{build_cdf, dirac_comb_from_density, pseudo_inverse, CdfTable, GridDensity};
pub use support::{default_mass_floor, Support, SupportBox};
