use crate::error::{Error, Result};
use crate::geometry::MetricWeights;

/// Which gradient drives the descent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Riemannian gradient under the KM metric, stopping on the KM norm.
    Rgd,
    /// Euclidean gradient, stopping on the Frobenius norm.
    Gd,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Rgd => "RGD",
            Algorithm::Gd => "GD",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "RGD" => Ok(Algorithm::Rgd),
            "GD" => Ok(Algorithm::Gd),
            other => Err(Error::InvalidConfig(format!("unknown algorithm '{other}'"))),
        }
    }
}

/// Parameters of a descent run. Defaults are the experimental settings:
/// `T = 10⁴`, `γ = 0.01`, `β = 0.5`, `ε = 1e-6`, `s̄ = 1`, halting gap `1e-10`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub algorithm: Algorithm,
    pub weights: MetricWeights,
    /// Iteration budget `T`.
    pub max_iters: usize,
    /// Stop when the gradient norm drops below this.
    pub grad_tol: f64,
    /// Armijo sufficient-decrease factor `γ`.
    pub armijo: f64,
    /// Backtracking factor `β`.
    pub backtrack: f64,
    /// Initial trial step `s̄`.
    pub initial_step: f64,
    /// Stop once `J(K) − J* < halt_gap` (only when `J*` is supplied).
    pub halt_gap: Option<f64>,
    /// Seeds the direction-perturbation generator.
    pub seed: u64,
    /// Relative size `η` of direction perturbations after a non-minimal landing.
    pub perturb_scale: f64,
    /// Clamp the first trial step to `0.99 ·` the stability certificate.
    pub use_certificate: bool,
    /// Record elapsed wall-clock time; when off every `wall_ms` is zero, so
    /// traces are reproducible byte for byte.
    pub record_wall_time: bool,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            algorithm: Algorithm::Rgd,
            weights: MetricWeights::UNIFORM,
            max_iters: 10_000,
            grad_tol: 1e-6,
            armijo: 0.01,
            backtrack: 0.5,
            initial_step: 1.0,
            halt_gap: Some(1e-10),
            seed: 0,
            perturb_scale: 1e-8,
            use_certificate: false,
            record_wall_time: true,
        }
    }
}

impl OptimizerConfig {
    pub fn rgd(weights: MetricWeights) -> Self {
        OptimizerConfig {
            algorithm: Algorithm::Rgd,
            weights,
            ..Default::default()
        }
    }

    pub fn gd() -> Self {
        OptimizerConfig {
            algorithm: Algorithm::Gd,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.armijo > 0.0 && self.armijo < 1.0) {
            return bad(format!("gamma must lie in (0, 1), got {}", self.armijo));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return bad(format!("beta must lie in (0, 1), got {}", self.backtrack));
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return bad(format!("sbar must be positive, got {}", self.initial_step));
        }
        if !(self.grad_tol >= 0.0 && self.grad_tol.is_finite()) {
            return bad(format!("eps must be non-negative, got {}", self.grad_tol));
        }
        if let Some(g) = self.halt_gap {
            if !(g >= 0.0 && g.is_finite()) {
                return bad(format!("halt_gap must be non-negative, got {g}"));
            }
        }
        if !(self.perturb_scale >= 0.0 && self.perturb_scale.is_finite()) {
            return bad(format!(
                "perturb_scale must be non-negative, got {}",
                self.perturb_scale
            ));
        }
        MetricWeights::new(self.weights.w1(), self.weights.w2(), self.weights.w3())?;
        Ok(())
    }
}
