//! One-point zero-order descent against gradient descent from a far start.

use serde::{Deserialize, Serialize};

use crate::error::{nonnegative, positive, Error, Result};
use crate::optimizers::{
    run_optimizer, GradientSource, Initialization, Method, Problem, RunConfig, Trace,
};
use crate::schedule::LearningRateSchedule;
use crate::vector::RealVector;

/// Least squares `‖θ‖²` (target zero) started from `θ_0 = init · 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DivergenceConfig {
    pub dim: usize,
    pub init: f64,
    pub alpha: f64,
    pub sigma2: f64,
    pub iterations: u64,
    pub seed: u64,
}

impl DivergenceConfig {
    /// The frozen regression fixture. The one-point iterate leaves the
    /// finite range within a few dozen steps; gradient descent contracts by
    /// `(1 - 2α)²` per step.
    pub fn pinned() -> Self {
        Self {
            dim: 100,
            init: 3.0,
            alpha: 0.005,
            sigma2: 1.0,
            iterations: 200,
            seed: 20_261_016,
        }
    }

    pub fn validated(self) -> Result<Self> {
        if self.dim == 0 {
            return Err(Error::EmptyVector);
        }
        nonnegative("alpha", self.alpha)?;
        positive("sigma2", self.sigma2)?;
        if !self.init.is_finite() {
            return Err(Error::NonFinite { index: 0 });
        }
        Ok(self)
    }
}

/// Losses per iteration, index 0 being the shared initial loss. A one-point
/// run that leaves the finite range ends its trace early and counts as
/// infinite loss from then on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivergenceTrace {
    pub one_point: Vec<f64>,
    pub gd: Vec<f64>,
    pub overflow_at: Option<u64>,
}

impl DivergenceTrace {
    pub fn initial_loss(&self) -> f64 {
        self.gd[0]
    }

    pub fn one_point_final(&self) -> f64 {
        if self.overflow_at.is_some() {
            f64::INFINITY
        } else {
            *self.one_point.last().unwrap_or(&f64::NAN)
        }
    }

    pub fn gd_final(&self) -> f64 {
        *self.gd.last().unwrap_or(&f64::NAN)
    }

    /// One-point loss above 10× the initial loss at the last iteration.
    pub fn diverged(&self) -> bool {
        self.one_point_final() > 10.0 * self.initial_loss()
    }

    /// Gradient-descent loss below 0.1× the initial loss at the last iteration.
    pub fn gd_converged(&self) -> bool {
        self.gd_final() < 0.1 * self.initial_loss()
    }

    pub fn gd_monotone(&self) -> bool {
        self.gd.windows(2).all(|w| w[1] <= w[0])
    }
}

fn losses(trace: &Trace) -> Vec<f64> {
    trace
        .initial_loss
        .iter()
        .copied()
        .chain(trace.rows.iter().map(|r| r.loss))
        .collect()
}

pub fn divergence_demo(config: &DivergenceConfig) -> Result<DivergenceTrace> {
    let c = config.clone().validated()?;
    let problem = Problem::LeastSquares {
        target: RealVector::zeros(c.dim)?,
    };
    let mut run = RunConfig::new(LearningRateSchedule::constant(c.alpha)?, c.iterations, c.seed);
    run.init = Initialization::Given {
        theta: RealVector::filled(c.dim, c.init)?,
    };
    let gd = run_optimizer(
        &Method::Gd {
            gradient: GradientSource::Analytic,
        },
        &problem,
        &run,
    )
    .map_err(|f| f.error)?;
    let one_point = Method::OnePoint {
        sigma2: c.sigma2,
        beta: None,
    };
    let (one_point, overflow_at) = match run_optimizer(&one_point, &problem, &run) {
        Ok(trace) => (losses(&trace), None),
        Err(failure) => match failure.error {
            Error::AtIteration { iteration, source }
                if matches!(*source, Error::NonFinite { .. } | Error::Overflow { .. }) =>
            {
                (losses(&failure.partial), Some(iteration))
            }
            other => return Err(other),
        },
    };
    Ok(DivergenceTrace {
        one_point,
        gd: losses(&gd),
        overflow_at,
    })
}
