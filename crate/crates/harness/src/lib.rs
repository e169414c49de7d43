//! Experiment harness for the kinetic Kuramoto solvers: configuration,
//! seeded randomness, initial-data presets and the verification experiments
//! behind the `kuramoto` CLI.

// `!(x > 0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod experiments;
pub mod presets;
pub mod report;
pub mod rng;

pub use config::{Experiment, ExperimentConfig};
pub use error::{HarnessError, Result};
pub use experiments::run;
pub use report::{Report, Verdict};
