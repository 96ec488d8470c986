use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Frequency outside the admissible range (e.g. `x = 0`).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    /// The `α(θ) ≤ α(θ')` ordering required by the Lipschitz ratio was violated.
    #[error("ordering error: alpha(theta) = {alpha} exceeds alpha(theta') = {alpha_prime}")]
    Ordering { alpha: f64, alpha_prime: f64 },

    #[error("quadrature did not converge: {context} (achieved error estimate {achieved:e})")]
    Quadrature { context: String, achieved: f64 },

    /// A Levinson prediction variance fell below the positive-definiteness threshold.
    #[error("Toeplitz breakdown at order {order}: prediction variance {variance:e} <= threshold {threshold:e}")]
    Breakdown { order: usize, variance: f64, threshold: f64 },

    #[error("dense factorization failed at pivot {pivot}: matrix is not positive definite")]
    Factorization { pivot: usize },

    #[error("conjugate gradient stalled after {iterations} iterations (relative residual {residual:e})")]
    CgStalled { iterations: usize, residual: f64 },

    #[error("circulant embedding rejected: clamping would remove {fraction:e} of the eigenvalue mass")]
    NonEmbeddable { fraction: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{context}: {source}")]
    AtTheta {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::Quadrature { .. }
            | Error::Breakdown { .. }
            | Error::Factorization { .. }
            | Error::CgStalled { .. }
            | Error::NonEmbeddable { .. } => true,
            Error::AtTheta { source, .. } => source.is_numeric(),
            _ => false,
        }
    }

    pub(crate) fn at_theta(self, theta: &[f64]) -> Error {
        Error::AtTheta {
            context: format!("at theta = {theta:?}"),
            source: Box::new(self),
        }
    }
}
