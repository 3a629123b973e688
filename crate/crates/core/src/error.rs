use thiserror::Error;

pub type Result<T> = std::result::Result<T, HbtError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HbtError {
    /// A parameter violates its documented domain.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("case {case} has a distributional density (shell); it is only handled through its radial measure")]
    DistributionalDensity { case: char },

    #[error("case {case} is a non-factorized source")]
    NonFactorized { case: char },

    #[error("quadrature did not converge after {subdivisions} subdivisions (estimated error {error:.3e})")]
    NonConvergence { subdivisions: usize, error: f64 },

    #[error("insufficient significant points: {0}")]
    InsufficientSignificantPoints(String),

    #[error("fitted slope is not negative (slope {slope:.6e} ± {err:.3e}); data look non-chaotic or mis-binned")]
    NegativeSlopeVariance { slope: f64, err: f64 },

    #[error("cannot renormalize: no significant correlation at origin (excess {excess:.3e}, sigma {sigma:.3e})")]
    CannotRenormalize { excess: f64, sigma: f64 },

    #[error("window too narrow: {found} points inside, at least {needed} required")]
    WindowTooNarrow { found: usize, needed: usize },

    #[error("insufficient X range: max X = {max_x:.3}")]
    InsufficientXRange { max_x: f64 },

    #[error("no origin coverage: {0}")]
    NoOriginCoverage(String),

    #[error("singular least-squares system")]
    SingularFit,

    #[error("malformed surface data: {0}")]
    Parse(String),
}

impl HbtError {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        HbtError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    /// True for failures of a numerical procedure, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            HbtError::InvalidParameter { .. } | HbtError::Parse(_) | HbtError::DistributionalDensity { .. }
        )
    }
}
