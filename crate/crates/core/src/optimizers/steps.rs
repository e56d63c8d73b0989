//! Single iterations of the four schemes.
//!
//! Every stochastic step accepts `forced` noise so tests can pin the draw;
//! with `None` the noise comes from the state's [`RngStream`].

use serde::{Deserialize, Serialize};

use super::anticipated::AnticipatedLossStrategy;
use super::state::{MultiplicativeState, OptimizerState, WeightVector};
use crate::error::{positive, Error, Result};
use crate::losses::{central_differences, LossFunction, SupervisedSample};
use crate::perturbation::{fill_uniform, NoiseConfig};
use crate::schedule::LearningRateSchedule;
use crate::vector::check_dims;

/// Isotropic Gaussian perturbation `ξ ~ N(0, σ² I)` with estimator scale `β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianNoiseConfig {
    pub sigma2: f64,
    /// Defaults to `1 / σ²`.
    #[serde(default)]
    pub beta: Option<f64>,
}

impl GaussianNoiseConfig {
    pub fn new(sigma2: f64, beta: f64) -> Result<Self> {
        Self {
            sigma2,
            beta: Some(beta),
        }
        .validated()
    }

    /// `β = σ^{-2}`
    pub fn canonical(sigma2: f64) -> Result<Self> {
        Self {
            sigma2,
            beta: None,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self> {
        positive("sigma2", self.sigma2)?;
        if let Some(beta) = self.beta {
            positive("beta", beta)?;
        }
        Ok(self)
    }

    pub fn beta(&self) -> f64 {
        self.beta.unwrap_or(1.0 / self.sigma2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientSource {
    /// Analytic gradient, central differences if the loss has none.
    #[default]
    Auto,
    /// Require the analytic gradient.
    Analytic,
    FiniteDifference,
}

/// What to do when a multiplicative factor `1 + αΔL(e^{-U}-e^{U})` is not
/// positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PositivityPolicy {
    #[default]
    Abort,
    /// Replace the factor with `max(factor, 1e-8)`.
    Clamp,
}

pub const CLAMP_FLOOR: f64 = 1e-8;

const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    /// Loss evaluated by the step: `L(θ_k)` for gradient descent, the
    /// perturbed loss for the zero-order schemes.
    pub realized_loss: f64,
    /// `ΔL = L(θ_k + U_k) - L̄` for the plasticity schemes.
    pub loss_delta: Option<f64>,
}

fn forced_dim(forced: Option<&[f64]>, dim: usize) -> Result<()> {
    match forced {
        Some(f) => check_dims(dim, f.len()),
        None => Ok(()),
    }
}

/// `θ_{k+1} = θ_k - α_{k+1} ∇L(θ_k)`.
pub fn gd_step<L: LossFunction + ?Sized>(
    state: &mut OptimizerState,
    loss: &L,
    sample: &SupervisedSample,
    schedule: &LearningRateSchedule,
    gradient: GradientSource,
) -> Result<StepOutcome> {
    let alpha = schedule.rate(state.k + 1)?;
    let theta = state.theta.as_slice();
    let grad = match gradient {
        GradientSource::Auto => loss
            .gradient(theta, sample)
            .unwrap_or_else(|| central_differences(loss, theta, FD_STEP, sample)),
        GradientSource::Analytic => loss
            .gradient(theta, sample)
            .ok_or(Error::GradientUnavailable)?,
        GradientSource::FiniteDifference => central_differences(loss, theta, FD_STEP, sample),
    };
    check_dims(theta.len(), grad.len())?;
    let realized_loss = loss.value(theta, sample);
    let next = theta.iter().zip(&grad).map(|(t, g)| t - alpha * g).collect();
    state.advance(next)?;
    state.history.push(realized_loss);
    Ok(StepOutcome {
        realized_loss,
        loss_delta: None,
    })
}

/// One-point Gaussian zero-order step `θ_{k+1} = θ_k - α β L(θ_k + ξ) ξ`.
pub fn one_point_zo_step<L: LossFunction + ?Sized>(
    state: &mut OptimizerState,
    loss: &L,
    sample: &SupervisedSample,
    schedule: &LearningRateSchedule,
    noise: &GaussianNoiseConfig,
    forced: Option<&[f64]>,
) -> Result<StepOutcome> {
    let alpha = schedule.rate(state.k + 1)?;
    let dim = state.theta.dim();
    forced_dim(forced, dim)?;
    let xi: Vec<f64> = match forced {
        Some(f) => f.to_vec(),
        None => {
            let sd = noise.sigma2.sqrt();
            (0..dim).map(|_| state.rng.normal(sd)).collect()
        }
    };
    let probe: Vec<f64> = state.theta.iter().zip(&xi).map(|(t, x)| t + x).collect();
    let realized_loss = loss.value(&probe, sample);
    let scale = alpha * noise.beta() * realized_loss;
    let next = state
        .theta
        .iter()
        .zip(&xi)
        .map(|(t, x)| t - scale * x)
        .collect();
    state.advance(next)?;
    state.history.push(realized_loss);
    Ok(StepOutcome {
        realized_loss,
        loss_delta: None,
    })
}

/// Plasticity rule in log-weight coordinates:
/// `θ_{k+1} = θ_k + α_{k+1} (L(θ_k + U_k) - L̄) (e^{-U_k} - e^{U_k})`,
/// `U_k ~ U([-A, A]^d)`. The realized loss is appended to the history.
pub fn bnn_zo_step<L: LossFunction + ?Sized>(
    state: &mut OptimizerState,
    loss: &L,
    sample: &SupervisedSample,
    schedule: &LearningRateSchedule,
    noise: &NoiseConfig,
    strategy: &AnticipatedLossStrategy,
    forced: Option<&[f64]>,
) -> Result<StepOutcome> {
    let noise = noise.validated()?;
    let dim = state.theta.dim();
    check_dims(dim, noise.dim)?;
    forced_dim(forced, dim)?;
    let baseline = state.history.anticipated(strategy)?;
    let alpha = schedule.rate(state.k + 1)?;
    let u = match forced {
        Some(f) => f.to_vec(),
        None => {
            let mut u = vec![0.0; dim];
            fill_uniform(noise.half_interval, &mut u, &mut state.rng);
            u
        }
    };
    let probe: Vec<f64> = state.theta.iter().zip(&u).map(|(t, u)| t + u).collect();
    let realized_loss = loss.value(&probe, sample);
    let delta = realized_loss - baseline;
    let next = state
        .theta
        .iter()
        .zip(&u)
        .map(|(t, u)| t + alpha * delta * ((-u).exp() - u.exp()))
        .collect();
    state.advance(next)?;
    state.history.push(realized_loss);
    Ok(StepOutcome {
        realized_loss,
        loss_delta: Some(delta),
    })
}

/// The same rule on the weights themselves:
/// `w_{k+1} = w_k ⊙ (1 + α ΔL (e^{-U} - e^{U}))`, with the loss evaluated
/// at `w_k ⊙ e^{U_k}`.
#[allow(clippy::too_many_arguments)]
pub fn bnn_multiplicative_step<L: LossFunction + ?Sized>(
    state: &mut MultiplicativeState,
    loss: &L,
    sample: &SupervisedSample,
    schedule: &LearningRateSchedule,
    noise: &NoiseConfig,
    strategy: &AnticipatedLossStrategy,
    policy: PositivityPolicy,
    forced: Option<&[f64]>,
) -> Result<StepOutcome> {
    let noise = noise.validated()?;
    let dim = state.weights.dim();
    check_dims(dim, noise.dim)?;
    forced_dim(forced, dim)?;
    let baseline = state.history.anticipated(strategy)?;
    let alpha = schedule.rate(state.k + 1)?;
    let u = match forced {
        Some(f) => f.to_vec(),
        None => {
            let mut u = vec![0.0; dim];
            fill_uniform(noise.half_interval, &mut u, &mut state.rng);
            u
        }
    };
    let w = state.weights.as_slice();
    let probe: Vec<f64> = w.iter().zip(&u).map(|(w, u)| w * u.exp()).collect();
    let realized_loss = loss.value(&probe, sample);
    let delta = realized_loss - baseline;
    let mut next = Vec::with_capacity(dim);
    for (index, (w, u)) in w.iter().zip(&u).enumerate() {
        let multiplier = 1.0 + alpha * delta * ((-u).exp() - u.exp());
        let multiplier = if multiplier > 0.0 {
            multiplier
        } else {
            match policy {
                PositivityPolicy::Abort => {
                    return Err(Error::PositivityViolation { index, multiplier })
                }
                PositivityPolicy::Clamp => multiplier.max(CLAMP_FLOOR),
            }
        };
        next.push(w * multiplier);
    }
    state.weights = WeightVector::new(next)?;
    state.k += 1;
    state.history.push(realized_loss);
    Ok(StepOutcome {
        realized_loss,
        loss_delta: Some(delta),
    })
}

/// Views a log-weight loss `L(θ)` as a weight-space loss `v ↦ L(log v)`.
#[derive(Debug, Clone)]
pub struct WeightSpaceLoss<L>(pub L);

impl<L: LossFunction> LossFunction for WeightSpaceLoss<L> {
    fn value(&self, params: &[f64], sample: &SupervisedSample) -> f64 {
        let theta: Vec<f64> = params.iter().map(|v| v.ln()).collect();
        self.0.value(&theta, sample)
    }

    fn gradient(&self, params: &[f64], sample: &SupervisedSample) -> Option<Vec<f64>> {
        let theta: Vec<f64> = params.iter().map(|v| v.ln()).collect();
        let g = self.0.gradient(&theta, sample)?;
        Some(g.iter().zip(params).map(|(g, v)| g / v).collect())
    }
}
