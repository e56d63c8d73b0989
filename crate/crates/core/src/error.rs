use thiserror::Error;

/// Errors raised by the numeric primitives, optimizers, simulator and checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("vector must have at least one component")]
    EmptyVector,

    #[error("component {index} is not finite")]
    NonFinite { index: usize },

    #[error("exponential overflows at component {index}")]
    Overflow { index: usize },

    #[error("{name} {reason}")]
    InvalidParameter {
        name: &'static str,
        reason: &'static str,
    },

    #[error("anticipated loss needs at least one past loss")]
    EmptyHistory,

    #[error("no gradient available for this loss")]
    GradientUnavailable,

    #[error("weight {index} would lose positivity (multiplier {multiplier})")]
    PositivityViolation { index: usize, multiplier: f64 },

    #[error("spike timing must satisfy T- <= tau <= T+")]
    TimingOrder,

    #[error("incoming signal {total} stays below threshold {threshold}")]
    BelowThreshold { total: f64, threshold: f64 },

    #[error("invalid topology: {0}")]
    Topology(String),

    #[error("quadrature oracle supports d <= 3, got d = {0}")]
    QuadratureDimension(usize),

    #[error("iteration {iteration}: {source}")]
    AtIteration {
        iteration: u64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

/// Finite and strictly positive.
pub fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: "must be positive",
        })
    }
}

/// Finite and nonnegative.
pub fn nonnegative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value >= 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: "must be nonnegative",
        })
    }
}
