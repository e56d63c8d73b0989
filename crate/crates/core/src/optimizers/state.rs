use serde::{Deserialize, Serialize};

use super::anticipated::LossHistory;
use crate::error::{positive, Error, Result};
use crate::rng::RngStream;
use crate::vector::RealVector;

/// Iterate, previous iterate, realized-loss history and the noise stream of
/// an additive (θ-space) optimizer.
#[derive(Debug, Clone)]
pub struct OptimizerState {
    pub(crate) theta: RealVector,
    pub(crate) theta_prev: RealVector,
    pub(crate) history: LossHistory,
    pub(crate) k: u64,
    pub(crate) rng: RngStream,
}

impl OptimizerState {
    /// Starts at `θ_0 = θ_{-1} = theta0` with an empty history.
    pub fn new(theta0: RealVector, memory: usize, rng: RngStream) -> Self {
        Self {
            theta_prev: theta0.clone(),
            theta: theta0,
            history: LossHistory::new(memory),
            k: 0,
            rng,
        }
    }

    pub fn with_previous(mut self, theta_prev: RealVector) -> Result<Self> {
        crate::vector::check_dims(self.theta.dim(), theta_prev.dim())?;
        self.theta_prev = theta_prev;
        Ok(self)
    }

    pub fn theta(&self) -> &RealVector {
        &self.theta
    }

    pub fn theta_previous(&self) -> &RealVector {
        &self.theta_prev
    }

    pub fn history(&self) -> &LossHistory {
        &self.history
    }

    pub fn history_mut(&mut self) -> &mut LossHistory {
        &mut self.history
    }

    pub fn iteration(&self) -> u64 {
        self.k
    }

    pub fn rng_mut(&mut self) -> &mut RngStream {
        &mut self.rng
    }

    pub(crate) fn advance(&mut self, next: Vec<f64>) -> Result<()> {
        let next = RealVector::new(next)?;
        self.theta_prev = std::mem::replace(&mut self.theta, next);
        self.k += 1;
        Ok(())
    }
}

/// Strictly positive connection strengths `w`, one per edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyVector);
        }
        for (index, w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::NonFinite { index });
            }
            positive("weight", *w)?;
        }
        Ok(Self(weights))
    }

    /// `w = e^θ`
    pub fn from_log(theta: &RealVector) -> Result<Self> {
        Self::new(theta.iter().map(|t| t.exp()).collect())
    }

    /// `θ = log w`
    pub fn log(&self) -> RealVector {
        RealVector::new(self.0.iter().map(|w| w.ln()).collect())
            .expect("log of positive finite weights is finite")
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(value: WeightVector) -> Self {
        value.0
    }
}

/// State of the multiplicative (w-space) rule.
#[derive(Debug, Clone)]
pub struct MultiplicativeState {
    pub(crate) weights: WeightVector,
    pub(crate) history: LossHistory,
    pub(crate) k: u64,
    pub(crate) rng: RngStream,
}

impl MultiplicativeState {
    pub fn new(weights: WeightVector, memory: usize, rng: RngStream) -> Self {
        Self {
            weights,
            history: LossHistory::new(memory),
            k: 0,
            rng,
        }
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }

    pub fn history(&self) -> &LossHistory {
        &self.history
    }

    pub fn history_mut(&mut self) -> &mut LossHistory {
        &mut self.history
    }

    pub fn iteration(&self) -> u64 {
        self.k
    }

    pub fn rng_mut(&mut self) -> &mut RngStream {
        &mut self.rng
    }
}
