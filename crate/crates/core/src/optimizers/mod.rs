//! Gradient descent, the one-point Gaussian zero-order baseline, and the
//! plasticity-derived zero-order rule in both log-weight and weight
//! coordinates.

mod anticipated;
mod run;
mod state;
mod steps;

pub use anticipated::{anticipated_loss, AnticipatedLossStrategy, Discount, LossHistory, DEFAULT_MEMORY};
pub use run::{
    initial_theta, replicate_samples, run_optimizer, Initialization, Method, Problem, RunConfig,
    RunFailure, Trace, TraceRow,
};
pub use state::{MultiplicativeState, OptimizerState, WeightVector};
pub use steps::{
    bnn_multiplicative_step, bnn_zo_step, gd_step, one_point_zo_step, GaussianNoiseConfig,
    GradientSource, PositivityPolicy, StepOutcome, WeightSpaceLoss, CLAMP_FLOOR,
};
