//! Multi-replicate runs with deterministic traces.
//!
//! Replicate `r` draws from four substreams of the run seed: initialization,
//! data, optimizer noise and history warm-up. Initialization and data streams
//! do not depend on the method, so methods compared under one seed see the
//! same `θ_0` and the same samples.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::anticipated::AnticipatedLossStrategy;
use super::state::{MultiplicativeState, OptimizerState, WeightVector};
use super::steps::{
    bnn_multiplicative_step, bnn_zo_step, gd_step, one_point_zo_step, GaussianNoiseConfig,
    GradientSource, PositivityPolicy, StepOutcome, WeightSpaceLoss,
};
use crate::error::{nonnegative, Error, Result};
use crate::losses::{
    generate_stream, DataStream, Generator, LeastSquares, LinearModel, LossFunction,
    SupervisedSample,
};
use crate::perturbation::{fill_uniform, NoiseConfig};
use crate::rng::RngStream;
use crate::schedule::LearningRateSchedule;
use crate::vector::{check_dims, RealVector};

const STREAMS_PER_REPLICATE: u64 = 4;

fn stream_id(replicate: usize, role: u64) -> u64 {
    replicate as u64 * STREAMS_PER_REPLICATE + role
}

/// Objective plus the data that feeds it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Problem {
    /// `L(θ) = ‖y - θ‖²`, no covariates.
    LeastSquares { target: RealVector },
    /// `L(θ; x, y) = (y - ⟨x, θ⟩)²` on a linear-Gaussian stream.
    LinearRegression { theta_star: RealVector, noise_sd: f64 },
}

impl Problem {
    pub fn dim(&self) -> usize {
        match self {
            Problem::LeastSquares { target } => target.dim(),
            Problem::LinearRegression { theta_star, .. } => theta_star.dim(),
        }
    }

    pub fn validated(self) -> Result<Self> {
        if let Problem::LinearRegression { noise_sd, .. } = &self {
            nonnegative("noise_sd", *noise_sd)?;
        }
        Ok(self)
    }

    pub fn loss(&self) -> Box<dyn LossFunction> {
        match self {
            Problem::LeastSquares { target } => Box::new(LeastSquares::new(target.clone())),
            Problem::LinearRegression { .. } => Box::new(LinearModel),
        }
    }

    pub fn generator(&self) -> Generator {
        match self {
            Problem::LeastSquares { .. } => Generator::FixedTarget,
            Problem::LinearRegression {
                theta_star,
                noise_sd,
            } => Generator::LinearGaussian {
                theta_star: theta_star.clone(),
                noise_sd: *noise_sd,
            },
        }
    }

    /// Expected loss at `θ`; this is the `loss` column of a trace.
    pub fn risk(&self, theta: &[f64]) -> f64 {
        match self {
            Problem::LeastSquares { target } => target
                .iter()
                .zip(theta)
                .map(|(y, t)| (y - t) * (y - t))
                .sum(),
            Problem::LinearRegression {
                theta_star,
                noise_sd,
            } => {
                theta_star
                    .iter()
                    .zip(theta)
                    .map(|(s, t)| (s - t) * (s - t))
                    .sum::<f64>()
                    + noise_sd * noise_sd
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Method {
    Gd {
        #[serde(default)]
        gradient: GradientSource,
    },
    OnePoint {
        sigma2: f64,
        /// Defaults to `1 / σ²`.
        #[serde(default)]
        beta: Option<f64>,
    },
    Bnn {
        half_interval: f64,
        #[serde(default)]
        strategy: AnticipatedLossStrategy,
    },
    BnnMultiplicative {
        half_interval: f64,
        #[serde(default)]
        strategy: AnticipatedLossStrategy,
        #[serde(default)]
        positivity: PositivityPolicy,
    },
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Gd { .. } => "gd",
            Method::OnePoint { .. } => "one-point",
            Method::Bnn { .. } => "bnn",
            Method::BnnMultiplicative { .. } => "bnn-multiplicative",
        }
    }

    pub fn validated(self) -> Result<Self> {
        match self {
            Method::Gd { .. } => {}
            Method::OnePoint { sigma2, beta } => {
                GaussianNoiseConfig { sigma2, beta }.validated()?;
            }
            Method::Bnn {
                half_interval,
                strategy,
            }
            | Method::BnnMultiplicative {
                half_interval,
                strategy,
                ..
            } => {
                NoiseConfig::new(half_interval, 1)?;
                strategy.validated()?;
            }
        }
        Ok(self)
    }
}

/// Starting point `θ_0 = θ_{-1}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Initialization {
    #[default]
    StandardNormal,
    Given { theta: RealVector },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub schedule: LearningRateSchedule,
    pub iterations: u64,
    pub replicates: usize,
    pub seed: u64,
    pub init: Initialization,
    pub record_theta: bool,
    /// Worker threads for replicate fan-out; `<= 1` runs sequentially.
    pub parallel: usize,
}

impl RunConfig {
    pub fn new(schedule: LearningRateSchedule, iterations: u64, seed: u64) -> Self {
        Self {
            schedule,
            iterations,
            replicates: 1,
            seed,
            init: Initialization::StandardNormal,
            record_theta: false,
            parallel: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub method: &'static str,
    pub replicate: usize,
    pub iter: u64,
    pub loss: f64,
    pub theta_norm: f64,
    pub theta: Option<Vec<f64>>,
}

/// Rows ordered by replicate, then iteration `1..=n` (the state after each
/// step). Initial losses are kept separately, one per replicate.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
    pub initial_loss: Vec<f64>,
}

impl Trace {
    /// Mean loss across replicates at iteration `iter` (0 = initial).
    pub fn mean_loss(&self, iter: u64) -> Option<f64> {
        let values: Vec<f64> = if iter == 0 {
            self.initial_loss.clone()
        } else {
            self.rows
                .iter()
                .filter(|r| r.iter == iter)
                .map(|r| r.loss)
                .collect()
        };
        if values.is_empty() {
            None
        } else {
            Some(values.iter().sum::<f64>() / values.len() as f64)
        }
    }
}

/// A run that stopped early; `partial` holds everything recorded before the
/// failing step.
#[derive(Debug, Clone, PartialEq)]
pub struct RunFailure {
    pub partial: Trace,
    pub replicate: usize,
    pub error: Error,
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "replicate {}: {}", self.replicate, self.error)
    }
}

impl std::error::Error for RunFailure {}

struct ReplicateRun {
    initial_loss: f64,
    rows: Vec<TraceRow>,
    error: Option<Error>,
}

/// Data for replicate `r`: `samples[0]` is the warm-up observation
/// `(X_{-1}, Y_{-1})`, `samples[k]` feeds step `k`.
pub fn replicate_samples(
    problem: &Problem,
    seed: u64,
    replicate: usize,
    iterations: u64,
) -> Result<Vec<SupervisedSample>> {
    let mut stream = DataStream::new(problem.generator(), RngStream::new(seed, stream_id(replicate, 1)))?;
    Ok(generate_stream(&mut stream, iterations as usize + 1))
}

pub fn initial_theta(problem: &Problem, cfg: &RunConfig, replicate: usize) -> Result<RealVector> {
    match &cfg.init {
        Initialization::Given { theta } => {
            check_dims(problem.dim(), theta.dim())?;
            Ok(theta.clone())
        }
        Initialization::StandardNormal => {
            let mut rng = RngStream::new(cfg.seed, stream_id(replicate, 0));
            RealVector::new((0..problem.dim()).map(|_| rng.standard_normal()).collect())
        }
    }
}

/// Runs `cfg.replicates` independent copies of `method` on `problem`.
pub fn run_optimizer(
    method: &Method,
    problem: &Problem,
    cfg: &RunConfig,
) -> std::result::Result<Trace, RunFailure> {
    let fail = |error| RunFailure {
        partial: Trace::default(),
        replicate: 0,
        error,
    };
    let method = method.validated().map_err(fail)?;
    let problem = problem.clone().validated().map_err(fail)?;
    let schedule = cfg.schedule.validated().map_err(fail)?;

    let run_one = |r: usize| run_replicate(&method, &problem, &schedule, cfg, r);
    let runs: Vec<Result<ReplicateRun>> = if cfg.parallel > 1 {
        match rayon::ThreadPoolBuilder::new().num_threads(cfg.parallel).build() {
            Ok(pool) => pool.install(|| (0..cfg.replicates).into_par_iter().map(run_one).collect()),
            Err(_) => (0..cfg.replicates).map(run_one).collect(),
        }
    } else {
        (0..cfg.replicates).map(run_one).collect()
    };

    let mut trace = Trace::default();
    let mut first_failure = None;
    for (r, run) in runs.into_iter().enumerate() {
        match run {
            Ok(run) => {
                trace.initial_loss.push(run.initial_loss);
                trace.rows.extend(run.rows);
                if let (Some(error), None) = (run.error, &first_failure) {
                    first_failure = Some((r, error));
                }
            }
            Err(error) => {
                if first_failure.is_none() {
                    first_failure = Some((r, error));
                }
            }
        }
    }
    match first_failure {
        None => Ok(trace),
        Some((replicate, error)) => Err(RunFailure {
            partial: trace,
            replicate,
            error,
        }),
    }
}

fn run_replicate(
    method: &Method,
    problem: &Problem,
    schedule: &LearningRateSchedule,
    cfg: &RunConfig,
    replicate: usize,
) -> Result<ReplicateRun> {
    let samples = replicate_samples(problem, cfg.seed, replicate, cfg.iterations)?;
    let theta0 = initial_theta(problem, cfg, replicate)?;
    let loss = problem.loss();
    let noise_rng = RngStream::new(cfg.seed, stream_id(replicate, 2));
    let mut warmup_rng = RngStream::new(cfg.seed, stream_id(replicate, 3));
    let dim = problem.dim();
    let initial_loss = problem.risk(theta0.as_slice());

    let row = |iter: u64, theta: &[f64]| TraceRow {
        method: method.name(),
        replicate,
        iter,
        loss: problem.risk(theta),
        theta_norm: theta.iter().map(|t| t * t).sum::<f64>().sqrt(),
        theta: cfg.record_theta.then(|| theta.to_vec()),
    };

    let mut rows = Vec::with_capacity(cfg.iterations as usize);
    let mut error = None;

    // history seeded with L(θ_{-1} + U_{-1}, X_{-1}, Y_{-1})
    let warmup = |half_interval: f64, rng: &mut RngStream, theta: &[f64], loss: &dyn LossFunction| {
        let mut u = vec![0.0; dim];
        fill_uniform(half_interval, &mut u, rng);
        let probe: Vec<f64> = theta.iter().zip(&u).map(|(t, u)| t + u).collect();
        loss.value(&probe, &samples[0])
    };

    match *method {
        Method::BnnMultiplicative {
            half_interval,
            strategy,
            positivity,
        } => {
            let noise = NoiseConfig::new(half_interval, dim)?;
            let wloss = WeightSpaceLoss(loss);
            let mut state = MultiplicativeState::new(
                WeightVector::from_log(&theta0)?,
                strategy.memory,
                noise_rng,
            );
            let seed_loss = warmup(half_interval, &mut warmup_rng, theta0.as_slice(), &wloss.0);
            state.history_mut().push(seed_loss);
            for k in 1..=cfg.iterations {
                let step = bnn_multiplicative_step(
                    &mut state,
                    &wloss,
                    &samples[k as usize],
                    schedule,
                    &noise,
                    &strategy,
                    positivity,
                    None,
                );
                if let Err(e) = step {
                    error = Some(at(k, e));
                    break;
                }
                rows.push(row(k, state.weights().log().as_slice()));
            }
        }
        _ => {
            let mut state = OptimizerState::new(theta0.clone(), memory_of(method), noise_rng);
            if let Method::Bnn { half_interval, .. } = *method {
                let seed_loss = warmup(half_interval, &mut warmup_rng, theta0.as_slice(), &loss);
                state.history_mut().push(seed_loss);
            }
            let noise = match *method {
                Method::Bnn { half_interval, .. } => Some(NoiseConfig::new(half_interval, dim)?),
                _ => None,
            };
            for k in 1..=cfg.iterations {
                let sample = &samples[k as usize];
                let step: Result<StepOutcome> = match method {
                    Method::Gd { gradient } => gd_step(&mut state, &loss, sample, schedule, *gradient),
                    Method::OnePoint { sigma2, beta } => {
                        let noise = GaussianNoiseConfig {
                            sigma2: *sigma2,
                            beta: *beta,
                        };
                        one_point_zo_step(&mut state, &loss, sample, schedule, &noise, None)
                    }
                    Method::Bnn { strategy, .. } => bnn_zo_step(
                        &mut state,
                        &loss,
                        sample,
                        schedule,
                        noise.as_ref().expect("noise config built above"),
                        strategy,
                        None,
                    ),
                    Method::BnnMultiplicative { .. } => unreachable!(),
                };
                if let Err(e) = step {
                    error = Some(at(k, e));
                    break;
                }
                rows.push(row(k, state.theta().as_slice()));
            }
        }
    }

    Ok(ReplicateRun {
        initial_loss,
        rows,
        error,
    })
}

fn memory_of(method: &Method) -> usize {
    match method {
        Method::Bnn { strategy, .. } | Method::BnnMultiplicative { strategy, .. } => strategy.memory,
        _ => 1,
    }
}

fn at(iteration: u64, source: Error) -> Error {
    Error::AtIteration {
        iteration,
        source: Box::new(source),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn target(d: usize, value: f64) -> Problem {
        Problem::LeastSquares {
            target: RealVector::filled(d, value).unwrap(),
        }
    }

    fn bnn() -> Method {
        Method::Bnn {
            half_interval: 1.0,
            strategy: AnticipatedLossStrategy::previous(),
        }
    }

    #[test]
    fn zero_rate_freezes_every_method() {
        let problem = target(3, 2.0);
        let cfg = RunConfig::new(LearningRateSchedule::constant(0.0).unwrap(), 20, 4);
        for method in [
            Method::Gd {
                gradient: GradientSource::Auto,
            },
            Method::OnePoint {
                sigma2: 1.0,
                beta: None,
            },
            bnn(),
        ] {
            let trace = run_optimizer(&method, &problem, &cfg).unwrap();
            assert_eq!(trace.rows.len(), 20);
            assert!(trace.rows.iter().all(|r| r.loss == trace.initial_loss[0]));
        }
    }

    #[test]
    fn gd_converges_on_least_squares() {
        let problem = target(3, 1.5);
        let cfg = RunConfig::new(LearningRateSchedule::constant(0.25).unwrap(), 50, 9);
        let trace = run_optimizer(
            &Method::Gd {
                gradient: GradientSource::Auto,
            },
            &problem,
            &cfg,
        )
        .unwrap();
        assert!(trace.rows.last().unwrap().loss < 1e-10);
    }

    #[test]
    fn same_seed_same_trace_parallel_or_not() {
        let problem = Problem::LinearRegression {
            theta_star: RealVector::new(vec![1.0, -0.5, 0.25]).unwrap(),
            noise_sd: 0.1,
        };
        let mut cfg = RunConfig::new(LearningRateSchedule::constant(0.01).unwrap(), 30, 17);
        cfg.replicates = 6;
        let a = run_optimizer(&bnn(), &problem, &cfg).unwrap();
        cfg.parallel = 3;
        let b = run_optimizer(&bnn(), &problem, &cfg).unwrap();
        assert_eq!(a, b);
        let bits = |t: &Trace| t.rows.iter().map(|r| r.loss.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_eq!(a.rows[30].replicate, 1);
        assert_eq!(a.rows[30].iter, 1);
    }

    #[test]
    fn methods_share_initialization() {
        let problem = target(4, 0.0);
        let cfg = RunConfig::new(LearningRateSchedule::constant(0.0).unwrap(), 1, 5);
        let gd = run_optimizer(&Method::Gd { gradient: GradientSource::Auto }, &problem, &cfg).unwrap();
        let b = run_optimizer(&bnn(), &problem, &cfg).unwrap();
        assert_eq!(gd.initial_loss, b.initial_loss);
    }

    #[test]
    fn divergence_is_reported_with_iteration() {
        let problem = target(50, 0.0);
        let mut cfg = RunConfig::new(LearningRateSchedule::constant(10.0).unwrap(), 1000, 1);
        cfg.init = Initialization::Given {
            theta: RealVector::filled(50, 100.0).unwrap(),
        };
        let failure = run_optimizer(
            &Method::OnePoint {
                sigma2: 1.0,
                beta: None,
            },
            &problem,
            &cfg,
        )
        .unwrap_err();
        let Error::AtIteration { iteration, .. } = failure.error else {
            panic!("expected iteration context, got {:?}", failure.error);
        };
        assert_eq!(failure.partial.rows.len() as u64, iteration - 1);
    }

    #[test]
    fn multiplicative_run_tracks_additive_run() {
        let problem = target(3, 0.5);
        let mut cfg = RunConfig::new(LearningRateSchedule::constant(0.005).unwrap(), 200, 3);
        cfg.record_theta = true;
        let add = run_optimizer(&bnn(), &problem, &cfg).unwrap();
        let mult = run_optimizer(
            &Method::BnnMultiplicative {
                half_interval: 1.0,
                strategy: AnticipatedLossStrategy::previous(),
                positivity: PositivityPolicy::Abort,
            },
            &problem,
            &cfg,
        )
        .unwrap();
        let last_add = add.rows.last().unwrap().theta.clone().unwrap();
        let last_mult = mult.rows.last().unwrap().theta.clone().unwrap();
        for (a, m) in last_add.iter().zip(&last_mult) {
            assert!((a - m).abs() < 0.05, "{a} vs {m}");
        }
    }

    #[test]
    fn invalid_method_is_rejected_up_front() {
        let problem = target(2, 0.0);
        let cfg = RunConfig::new(LearningRateSchedule::constant(0.1).unwrap(), 5, 0);
        let failure = run_optimizer(
            &Method::Bnn {
                half_interval: -1.0,
                strategy: AnticipatedLossStrategy::previous(),
            },
            &problem,
            &cfg,
        )
        .unwrap_err();
        assert_eq!(failure.error.to_string(), "half_interval must be positive");
    }
}
