//! Losses evaluated at already-perturbed parameters, and the synthetic data
//! streams that feed them.

use serde::{Deserialize, Serialize};

use crate::error::{nonnegative, positive, Result};
use crate::rng::RngStream;
use crate::vector::{check_dims, RealVector};

/// One observation `(X_k, Y_k)`. Fixed-target problems carry no covariates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupervisedSample {
    pub index: u64,
    pub x: Vec<f64>,
    pub y: f64,
}

impl SupervisedSample {
    pub fn empty(index: u64) -> Self {
        Self {
            index,
            x: Vec::new(),
            y: 0.0,
        }
    }
}

/// A loss `L(params, X, Y)`.
///
/// `params` is whatever the optimizer chooses to evaluate, typically
/// `θ_k + U_k`; perturbing is never the loss's job.
pub trait LossFunction: Send + Sync {
    fn value(&self, params: &[f64], sample: &SupervisedSample) -> f64;

    fn gradient(&self, _params: &[f64], _sample: &SupervisedSample) -> Option<Vec<f64>> {
        None
    }
}

impl<L: LossFunction + ?Sized> LossFunction for &L {
    fn value(&self, params: &[f64], sample: &SupervisedSample) -> f64 {
        (**self).value(params, sample)
    }

    fn gradient(&self, params: &[f64], sample: &SupervisedSample) -> Option<Vec<f64>> {
        (**self).gradient(params, sample)
    }
}

impl<L: LossFunction + ?Sized> LossFunction for Box<L> {
    fn value(&self, params: &[f64], sample: &SupervisedSample) -> f64 {
        (**self).value(params, sample)
    }

    fn gradient(&self, params: &[f64], sample: &SupervisedSample) -> Option<Vec<f64>> {
        (**self).gradient(params, sample)
    }
}

/// `‖y - θ‖²` against a fixed target; ignores the sample.
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares {
    target: RealVector,
}

impl LeastSquares {
    pub fn new(target: RealVector) -> Self {
        Self { target }
    }

    pub fn target(&self) -> &RealVector {
        &self.target
    }
}

impl LossFunction for LeastSquares {
    fn value(&self, params: &[f64], _sample: &SupervisedSample) -> f64 {
        params
            .iter()
            .zip(self.target.iter())
            .map(|(t, y)| (y - t) * (y - t))
            .sum()
    }

    fn gradient(&self, params: &[f64], _sample: &SupervisedSample) -> Option<Vec<f64>> {
        Some(
            params
                .iter()
                .zip(self.target.iter())
                .map(|(t, y)| -2.0 * (y - t))
                .collect(),
        )
    }
}

/// `Σ_j (θ_j - c_j)^4`, a non-quadratic test loss.
#[derive(Debug, Clone, PartialEq)]
pub struct Quartic {
    center: RealVector,
}

impl Quartic {
    pub fn new(center: RealVector) -> Self {
        Self { center }
    }
}

impl LossFunction for Quartic {
    fn value(&self, params: &[f64], _sample: &SupervisedSample) -> f64 {
        params
            .iter()
            .zip(self.center.iter())
            .map(|(t, c)| (t - c).powi(4))
            .sum()
    }

    fn gradient(&self, params: &[f64], _sample: &SupervisedSample) -> Option<Vec<f64>> {
        Some(
            params
                .iter()
                .zip(self.center.iter())
                .map(|(t, c)| 4.0 * (t - c).powi(3))
                .collect(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantLoss(pub f64);

impl LossFunction for ConstantLoss {
    fn value(&self, _params: &[f64], _sample: &SupervisedSample) -> f64 {
        self.0
    }

    fn gradient(&self, params: &[f64], _sample: &SupervisedSample) -> Option<Vec<f64>> {
        Some(vec![0.0; params.len()])
    }
}

/// Squared residual of a linear predictor, `(y - ⟨x, θ⟩)²`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LinearModel;

impl LossFunction for LinearModel {
    fn value(&self, params: &[f64], sample: &SupervisedSample) -> f64 {
        let r = sample.y - dot(&sample.x, params);
        r * r
    }

    fn gradient(&self, params: &[f64], sample: &SupervisedSample) -> Option<Vec<f64>> {
        let r = sample.y - dot(&sample.x, params);
        Some(sample.x.iter().map(|x| -2.0 * r * x).collect())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn least_squares_loss(theta: &RealVector, y: &RealVector) -> Result<f64> {
    check_dims(theta.dim(), y.dim())?;
    Ok(LeastSquares::new(y.clone()).value(theta.as_slice(), &SupervisedSample::empty(0)))
}

pub fn least_squares_gradient(theta: &RealVector, y: &RealVector) -> Result<RealVector> {
    check_dims(theta.dim(), y.dim())?;
    RealVector::new(
        theta
            .iter()
            .zip(y.iter())
            .map(|(t, y)| -2.0 * (y - t))
            .collect(),
    )
}

pub fn linear_model_loss(theta: &RealVector, sample: &SupervisedSample) -> Result<f64> {
    check_dims(theta.dim(), sample.x.len())?;
    Ok(LinearModel.value(theta.as_slice(), sample))
}

pub fn linear_model_gradient(theta: &RealVector, sample: &SupervisedSample) -> Result<RealVector> {
    check_dims(theta.dim(), sample.x.len())?;
    RealVector::new(LinearModel.gradient(theta.as_slice(), sample).unwrap_or_default())
}

/// Central differences `(L(θ + h e_j) - L(θ - h e_j)) / 2h`.
pub fn finite_diff_gradient<L: LossFunction + ?Sized>(
    loss: &L,
    theta: &RealVector,
    h: f64,
    sample: &SupervisedSample,
) -> Result<RealVector> {
    positive("h", h)?;
    RealVector::new(central_differences(loss, theta.as_slice(), h, sample))
}

pub(crate) fn central_differences<L: LossFunction + ?Sized>(
    loss: &L,
    theta: &[f64],
    h: f64,
    sample: &SupervisedSample,
) -> Vec<f64> {
    let mut probe = theta.to_vec();
    (0..theta.len())
        .map(|j| {
            probe[j] = theta[j] + h;
            let up = loss.value(&probe, sample);
            probe[j] = theta[j] - h;
            let down = loss.value(&probe, sample);
            probe[j] = theta[j];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Analytic gradient when the loss has one, central differences otherwise.
pub(crate) fn gradient_or_fd<L: LossFunction + ?Sized>(
    loss: &L,
    theta: &[f64],
    sample: &SupervisedSample,
) -> Vec<f64> {
    loss.gradient(theta, sample)
        .unwrap_or_else(|| central_differences(loss, theta, 1e-6, sample))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Generator {
    /// No covariates; the target lives in the loss.
    FixedTarget,
    /// `x ~ N(0, I)`, `y = ⟨x, θ*⟩ + N(0, noise_sd²)`.
    LinearGaussian { theta_star: RealVector, noise_sd: f64 },
}

/// An i.i.d. stream of [`SupervisedSample`]s; single consumer.
#[derive(Debug, Clone)]
pub struct DataStream {
    generator: Generator,
    rng: RngStream,
    next_index: u64,
}

impl DataStream {
    pub fn new(generator: Generator, rng: RngStream) -> Result<Self> {
        if let Generator::LinearGaussian { noise_sd, .. } = &generator {
            nonnegative("noise_sd", *noise_sd)?;
        }
        Ok(Self {
            generator,
            rng,
            next_index: 0,
        })
    }

    pub fn next_sample(&mut self) -> SupervisedSample {
        let index = self.next_index;
        self.next_index += 1;
        match &self.generator {
            Generator::FixedTarget => SupervisedSample::empty(index),
            Generator::LinearGaussian {
                theta_star,
                noise_sd,
            } => {
                let x: Vec<f64> = (0..theta_star.dim())
                    .map(|_| self.rng.standard_normal())
                    .collect();
                let noise = if *noise_sd > 0.0 {
                    self.rng.normal(*noise_sd)
                } else {
                    0.0
                };
                let y = dot(&x, theta_star.as_slice()) + noise;
                SupervisedSample { index, x, y }
            }
        }
    }
}

pub fn generate_stream(stream: &mut DataStream, n: usize) -> Vec<SupervisedSample> {
    (0..n).map(|_| stream.next_sample()).collect()
}
