//! Benchmark systems and the comparison harness.

mod experiment;
mod generator;
mod hessian;
mod sampling;
mod systems;

pub use experiment::{
    run_experiment, CellOutcome, ExperimentCell, ExperimentConfig, ExperimentResult, Method,
    SummaryRow, TARGET_GAP,
};
pub use generator::{generate_random_plant, random_suite, MAX_GENERATION_ATTEMPTS};
pub use hessian::{
    finite_difference_hessian, hessian_signature_check, hessian_step, SignatureReport,
    DEFAULT_HESSIAN_STEP, ZERO_EIGENVALUE_TOL,
};
pub use sampling::{
    random_admissible_pair, random_bounded_pair, random_direction, random_similarity,
    MAX_BOUNDED_DRAWS,
};
pub use systems::{doyle_system, scalar_system, BenchmarkSystem};
