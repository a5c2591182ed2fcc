//! Plant/controller model, closed-loop assembly, LQG cost and its
//! differential, coordinate transforms, admissibility, and the Riccati oracle.
//!
//! Formulas are written for a general controller order `q`; the optimizers
//! and tests use full order `q = n`.

mod closed_loop;
mod controller;
mod cost;
mod oracle;
mod plant;

pub use closed_loop::{
    admissible, assemble_closed_loop, is_admissible, AdmissibilityReport, ClosedLoop,
};
pub use controller::{Controller, TangentDirection, MAX_TRANSFORM_COND};
pub use cost::{
    closed_loop_abscissa, cost_differential, cost_differential_nested, lqg_cost, state_covariance,
    LqgEvaluation,
};
pub use oracle::{lqg_riccati_optimum, LqgOptimum};
pub use plant::{AssumptionCheck, Plant, PlantParts};

pub(crate) use cost::hat_e;

/// The scalar plant `(A,B,C,W,V,Q,R) = (−1,1,1,1,1,1,1)` and the controller
/// `(A_K,B_K,C_K) = (−3,1,−1)` used throughout the examples and tests.
pub mod fixtures {
    use super::{Controller, Plant, PlantParts};
    use nalgebra::dmatrix;

    pub fn scalar_plant() -> Plant {
        Plant::new(PlantParts {
            a: dmatrix![-1.0],
            b: dmatrix![1.0],
            c: dmatrix![1.0],
            w: dmatrix![1.0],
            v: dmatrix![1.0],
            q: dmatrix![1.0],
            r: dmatrix![1.0],
        })
        .expect("scalar plant satisfies the standing assumptions")
    }

    pub fn scalar_controller() -> Controller {
        Controller::new(dmatrix![-3.0], dmatrix![1.0], dmatrix![-1.0]).expect("valid blocks")
    }
}
