//! Direct LQG policy optimization over full-order minimal output-feedback
//! controllers.
//!
//! The crate provides Riemannian gradient descent under the
//! Krishnaprasad–Martin (KM) metric, an ordinary gradient-descent baseline
//! sharing the same backtracking line search, a Riccati-based oracle for the
//! optimal cost, and the benchmark harness used to compare the two.
//!
//! Module map:
//! - [`matlin`]: dense kernels (Lyapunov, Riccati, pole placement, rank tests)
//! - [`lqg`]: plant/controller model, closed loop, cost, differential, oracle
//! - [`geometry`]: Grammians, KM metric, Gram matrix, gradients
//! - [`optimizer`]: line search, RGD/GD drivers, stability certificate
//! - [`bench`]: random plants, experiment runner, Hessian signature checks

pub mod bench;
pub mod error;
pub mod geometry;
pub mod lqg;
pub mod matlin;
pub mod optimizer;

pub use error::{Error, Result};
pub use matlin::{Matrix, SymmetricMatrix};
