use thiserror::Error;

/// Failure modes shared by every pipeline in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("format too large for the flattening cap ({size} coefficients, cap {cap})")]
    CapExceeded { size: usize, cap: usize },

    #[error("verification failed: relative residual {residual:e} exceeds tolerance {tol:e}")]
    VerificationFailed { residual: f64, tol: f64 },

    #[error("jet is not an embedding (vanishing first derivative)")]
    NotAnEmbedding,

    #[error("degenerate jet: {0}")]
    DegenerateJet(String),

    #[error("factor {factor} has local degree 1; reduce the presentation first")]
    AutarkyViolation { factor: usize },

    #[error("randomized search exhausted its retry budget (seed {seed})")]
    RetriesExhausted { seed: u64 },

    #[error("target is not in the span of the generators")]
    NotInSpan,

    #[error("point already lies in the span of a smaller sub-jet; reduce the order")]
    NotMinimal,

    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),

    #[error("direction is proportional to the support point in every factor")]
    NotATangent,

    #[error("jet vectors of component {component} are linearly dependent")]
    IndependenceFailure { component: usize },

    #[error("value {value} outside the admissible range {lo}..={hi}")]
    InvalidRange { value: usize, lo: usize, hi: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
