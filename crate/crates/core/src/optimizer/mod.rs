//! Descent on the space of minimal stabilizing controllers.
//!
//! [`run_rgd`] follows the Riemannian gradient of the KM metric and stops on
//! its KM norm; [`run_gd`] is the Euclidean baseline. Both take steps through
//! the same Armijo backtracking rule, which rejects any candidate that leaves
//! the admissible set.

mod certificate;
mod config;
mod driver;
mod init;
mod line_search;
mod trace;

pub use certificate::stability_certificate;
pub use config::{Algorithm, OptimizerConfig};
pub use driver::{run, run_gd, run_rgd};
pub use init::{random_minimal_init, MAX_INIT_ATTEMPTS};
pub use line_search::{
    backtracking_line_search, perturb_direction, LineSearchOutcome, MAX_HALVINGS, MAX_PERTURBATIONS,
};
pub use trace::{IterationRecord, RunTrace, Termination};
