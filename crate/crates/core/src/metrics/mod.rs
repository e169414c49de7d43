//! Distances between states and rate diagnostics.

mod assignment;
mod lemma;
mod moment;
mod rate;
mod wasserstein;

pub use assignment::{min_cost_assignment, w1_empirical, w1_fiberwise};
pub use lemma::{
    balance_signs, fit_to_range, lattice_weights, lemma_cal_check, lemma_cal_check_cases, project_mean_zero,
    CaseAudit, LemmaCheck, SignClass,
};
pub use moment::{bl_distance_upper, PhaseMoment};
pub use rate::{fit_decay_rate, RateFit};
pub use wasserstein::{fiber_distances, modified_wp, wasserstein_p_fiber};
