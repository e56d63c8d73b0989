//! Runnable checks of the expectation identities and the variance claim.

mod checks;
mod density;
mod divergence;
mod report;
mod sweep;

pub use checks::{
    check_bnn_step, check_componentwise, check_stein, check_theorem1, check_zero_mean_prev, componentwise_mean,
    gradient_form_mean, gradient_form_quadrature, raw_step_mean, IdentityParams, Theorem1Check,
    MAX_COMPONENTWISE_DIM, MAX_QUADRATURE_DIM, MIN_SAMPLES,
};
pub use density::{
    check_density_mass, check_density_sampler, check_normalizer, CHI_SQUARE_BINS, CHI_SQUARE_CRITICAL,
};
pub use divergence::{divergence_demo, DivergenceConfig, DivergenceTrace};
pub use report::{CheckReport, Criterion, Estimate, MeanAccumulator, ZERO_ORACLE};
pub use sweep::{
    estimator_variance, log_log_slope, variance_scaling_sweep, VariancePoint, VarianceSweep,
    SWEEP_OFFSET,
};
