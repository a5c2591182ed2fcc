use thiserror::Error;

/// Errors raised by the numerical kernels, the LQG model and the optimizers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hurwitz (spectral abscissa {abscissa:e})")]
    NotHurwitz { abscissa: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("eigenvalue iteration did not converge")]
    EigenFailure,

    #[error("no stabilizing Riccati solution: {0}")]
    NoStabilizingSolution(String),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("pole placement failed: {0}")]
    PlacementFailure(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("controller is not stabilizing (closed-loop spectral abscissa {abscissa:e})")]
    NotStabilizing { abscissa: f64 },

    #[error("controller is not minimal")]
    NotMinimal,

    #[error("coordinate transform is singular (condition number {cond:e})")]
    SingularTransform { cond: f64 },

    #[error("plant assumption violated: {0}")]
    InvalidPlant(String),

    #[error("metric Gram matrix is degenerate after jitter retries")]
    MetricDegenerate,

    #[error("direction is zero")]
    ZeroDirection,

    #[error("step size underflow after {halvings} halvings")]
    StepSizeUnderflow { halvings: usize },

    #[error("initial controller is not admissible: {0}")]
    InadmissibleStart(String),

    #[error("random initialization failed after {attempts} attempts")]
    InitFailure { attempts: usize },

    #[error("random plant generation failed after {attempts} attempts")]
    GenerationFailure { attempts: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
