use thiserror::Error;

/// Errors raised by the model, the integrator and the classifiers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("softening too large: |h|·epsilon^alpha = {value} must be < 1")]
    InvalidSoftening { value: f64 },

    #[error("operation requires the {expected} flavor")]
    Flavor { expected: &'static str },

    #[error("vector field is singular at the origin when epsilon = 0")]
    Singularity,

    #[error("c exceeds admissible bound: c = {c}, bound = {bound}")]
    CExceedsBound { c: f64, bound: f64 },

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    #[error("step size fell below {min_step:e} at tau = {tau}")]
    StepFailure { tau: f64, min_step: f64 },

    #[error("initial state is off the energy surface (residual {residual:e})")]
    EnergyViolation { residual: f64 },

    #[error("no sign change found while bracketing a root on [{lo}, {hi}]")]
    RootBracketFailure { lo: f64, hi: f64 },

    #[error("turning radii {r1} and {r2} are too close to separate without refinement")]
    TangencyAmbiguous { r1: f64, r2: f64 },

    #[error("unexpected root structure: {0}")]
    RootStructure(String),

    #[error("integration oracle inconclusive: {0}")]
    Inconclusive(String),
}

pub type Result<T> = std::result::Result<T, Error>;
