//! Monte Carlo checks of the expectation identities behind the update rules.
//!
//! Every check takes a seed and derives its own substreams, so a report is a
//! pure function of its arguments. Routes that are compared against each
//! other never share a stream.

use super::report::{CheckReport, Criterion, Estimate, MeanAccumulator, ZERO_ORACLE};
use crate::error::{positive, Error, Result};
use crate::losses::{gradient_or_fd, LossFunction, SupervisedSample};
use crate::optimizers::{bnn_zo_step, AnticipatedLossStrategy, OptimizerState};
use crate::perturbation::{fill_uniform, normalizer_c, timing_weight, NoiseConfig, PerturbationDensity};
use crate::quadrature::integrate_box;
use crate::rng::RngStream;
use crate::schedule::LearningRateSchedule;
use crate::vector::{check_dims, RealVector};

const STREAM_RAW: u64 = 0;
const STREAM_GRADIENT: u64 = 1;
const STREAM_COMPONENTWISE: u64 = 2;
const STREAM_PREVIOUS: u64 = 3;

/// Largest dimension for the tensor-product quadrature route.
pub const MAX_QUADRATURE_DIM: usize = 3;
/// Largest dimension accepted by [`check_componentwise`].
pub const MAX_COMPONENTWISE_DIM: usize = 10;
/// Smallest sample size for the zero-oracle checks.
pub const MIN_SAMPLES: u64 = 10_000;

const QUADRATURE_TOL: f64 = 1e-11;

/// Perturbation width, step size and sample count shared by the checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdentityParams {
    pub half_interval: f64,
    pub alpha: f64,
    pub n: u64,
    pub seed: u64,
}

impl IdentityParams {
    fn validated(self) -> Result<Self> {
        positive("half_interval", self.half_interval)?;
        positive("alpha", self.alpha)?;
        if self.n < 2 {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: "must be at least 2",
            });
        }
        Ok(self)
    }
}

fn at_least(n: u64, min: u64) -> Result<()> {
    if n < min {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "must be at least 10000",
        });
    }
    Ok(())
}

/// `E[L(θ + ξ) ξ]` for `L(v) = ‖y - v‖²`, `ξ ~ N(0, σ² I)`, against the
/// Stein oracle `σ² E[∇L(θ + ξ)] = -2σ²(y - θ)`.
pub fn check_stein(
    target: &RealVector,
    theta: &RealVector,
    sigma2: f64,
    n: u64,
    seed: u64,
) -> Result<CheckReport> {
    check_dims(target.dim(), theta.dim())?;
    positive("sigma2", sigma2)?;
    at_least(n, MIN_SAMPLES)?;
    let d = theta.dim();
    let sd = sigma2.sqrt();
    let mut rng = RngStream::new(seed, STREAM_RAW);
    let mut acc = MeanAccumulator::new(d);
    let mut xi = vec![0.0; d];
    let mut term = vec![0.0; d];
    for _ in 0..n {
        xi.iter_mut().for_each(|x| *x = rng.normal(sd));
        let loss: f64 = target
            .iter()
            .zip(theta.iter())
            .zip(&xi)
            .map(|((y, t), x)| (y - t - x).powi(2))
            .sum();
        term.iter_mut().zip(&xi).for_each(|(o, x)| *o = loss * x);
        acc.push(&term);
    }
    let est = acc.finish();
    let oracle = target
        .iter()
        .zip(theta.iter())
        .map(|(y, t)| -2.0 * sigma2 * (y - t))
        .collect();
    Ok(CheckReport::judge(
        "stein",
        n,
        seed,
        est.mean,
        oracle,
        est.se,
        Criterion::ZeroOrRelative { k: 3.0, rel: 0.05 },
    ))
}

/// Monte Carlo mean of the raw plasticity step `α L(θ + U)(e^{-U} - e^{U})`
/// with no baseline, `U ~ U([-A, A]^d)`.
pub fn raw_step_mean<L: LossFunction + ?Sized>(
    loss: &L,
    theta: &[f64],
    params: &IdentityParams,
    stream: u64,
) -> Result<Estimate> {
    let p = params.validated()?;
    let d = theta.len();
    let sample = SupervisedSample::empty(0);
    let mut rng = RngStream::new(p.seed, stream);
    let mut acc = MeanAccumulator::new(d);
    let mut u = vec![0.0; d];
    let mut probe = vec![0.0; d];
    let mut step = vec![0.0; d];
    for _ in 0..p.n {
        fill_uniform(p.half_interval, &mut u, &mut rng);
        probe.iter_mut().zip(theta.iter().zip(&u)).for_each(|(o, (t, u))| *o = t + u);
        let l = loss.value(&probe, &sample);
        step.iter_mut().zip(&u).for_each(|(o, u)| *o = p.alpha * l * ((-u).exp() - u.exp()));
        acc.push(&step);
    }
    Ok(acc.finish())
}

/// Monte Carlo mean of `-α e^{-A} ∇L(θ + U) ⊙ (e^A - e^U) ⊙ (e^A - e^{-U})`.
pub fn gradient_form_mean<L: LossFunction + ?Sized>(
    loss: &L,
    theta: &[f64],
    params: &IdentityParams,
    stream: u64,
) -> Result<Estimate> {
    let p = params.validated()?;
    let a = p.half_interval;
    let d = theta.len();
    let sample = SupervisedSample::empty(0);
    let scale = -p.alpha * (-a).exp();
    let mut rng = RngStream::new(p.seed, stream);
    let mut acc = MeanAccumulator::new(d);
    let mut u = vec![0.0; d];
    let mut probe = vec![0.0; d];
    for _ in 0..p.n {
        fill_uniform(a, &mut u, &mut rng);
        probe.iter_mut().zip(theta.iter().zip(&u)).for_each(|(o, (t, u))| *o = t + u);
        let mut g = gradient_or_fd(loss, &probe, &sample);
        g.iter_mut().zip(&u).for_each(|(g, u)| *g *= scale * timing_weight(a, *u));
        acc.push(&g);
    }
    Ok(acc.finish())
}

/// The gradient form integrated over `[-A, A]^d` by adaptive quadrature.
pub fn gradient_form_quadrature<L: LossFunction + ?Sized>(
    loss: &L,
    theta: &[f64],
    half_interval: f64,
    alpha: f64,
) -> Result<Vec<f64>> {
    positive("half_interval", half_interval)?;
    let d = theta.len();
    if d > MAX_QUADRATURE_DIM {
        return Err(Error::QuadratureDimension(d));
    }
    let a = half_interval;
    let sample = SupervisedSample::empty(0);
    let lower = vec![-a; d];
    let upper = vec![a; d];
    let scale = -alpha * (-a).exp() / (2.0 * a).powi(d as i32);
    let mut probe = vec![0.0; d];
    Ok((0..d)
        .map(|j| {
            let integral = integrate_box(
                |u| {
                    probe.iter_mut().zip(theta.iter().zip(u)).for_each(|(o, (t, u))| *o = t + u);
                    gradient_or_fd(loss, &probe, &sample)[j] * timing_weight(a, u[j])
                },
                &lower,
                &upper,
                QUADRATURE_TOL,
            );
            scale * integral
        })
        .collect())
}

/// Routes to the mean step: (a) raw step, (b) gradient form, (c) quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct Theorem1Check {
    pub n: u64,
    pub seed: u64,
    pub raw: Estimate,
    pub gradient: Estimate,
    pub quadrature: Option<Vec<f64>>,
}

/// Runs all three routes; `quadrature` is required unless `d > 3`, where it
/// is an error to ask for it.
pub fn check_theorem1<L: LossFunction + ?Sized>(
    loss: &L,
    theta: &[f64],
    params: &IdentityParams,
    quadrature: bool,
) -> Result<Theorem1Check> {
    let p = params.validated()?;
    let quadrature = if quadrature {
        Some(gradient_form_quadrature(loss, theta, p.half_interval, p.alpha)?)
    } else {
        None
    };
    Ok(Theorem1Check {
        n: p.n,
        seed: p.seed,
        raw: raw_step_mean(loss, theta, &p, STREAM_RAW)?,
        gradient: gradient_form_mean(loss, theta, &p, STREAM_GRADIENT)?,
        quadrature,
    })
}

impl Theorem1Check {
    /// Pairwise comparisons (a)/(b), (a)/(c), (b)/(c).
    ///
    /// Under [`Criterion::ZeroOrRelative`] a coordinate counts as a zero
    /// oracle when its quadrature value is zero; Monte Carlo pairs then use
    /// the combined standard error.
    pub fn reports(&self, criterion: Criterion) -> Vec<CheckReport> {
        let d = self.raw.mean.len();
        let zero: Vec<bool> = match &self.quadrature {
            Some(q) => q.iter().map(|v| v.abs() < ZERO_ORACLE).collect(),
            None => vec![false; d],
        };
        let judge = |name: &str, est: &[f64], oracle: &[f64], se: Vec<f64>| {
            let pass = (0..d).all(|j| match criterion {
                Criterion::ZeroOrRelative { k, rel } => {
                    let gap = (est[j] - oracle[j]).abs();
                    if zero[j] {
                        gap <= k * se[j]
                    } else {
                        gap <= rel * oracle[j].abs()
                    }
                }
                other => other.passes(est[j], oracle[j], se[j]),
            });
            CheckReport::from_parts(name, self.n, self.seed, est.to_vec(), oracle.to_vec(), se, pass)
        };
        let combined: Vec<f64> = self
            .raw
            .se
            .iter()
            .zip(&self.gradient.se)
            .map(|(a, b)| a.hypot(*b))
            .collect();
        let mut out = vec![judge(
            "theorem1/raw-vs-gradient",
            &self.raw.mean,
            &self.gradient.mean,
            combined,
        )];
        if let Some(q) = &self.quadrature {
            out.push(judge("theorem1/raw-vs-quadrature", &self.raw.mean, q, self.raw.se.clone()));
            out.push(judge(
                "theorem1/gradient-vs-quadrature",
                &self.gradient.mean,
                q,
                self.gradient.se.clone(),
            ));
        }
        out
    }
}

/// Per coordinate `j`, the Monte Carlo mean of
/// `-α e^{-A} C(A)/(2A) ∂_j L(θ + U^{(j)})`, where `U^{(j)}` has its `j`-th
/// entry drawn from `f_A` and the rest uniform.
pub fn componentwise_mean<L: LossFunction + ?Sized>(
    loss: &L,
    theta: &[f64],
    params: &IdentityParams,
) -> Result<Estimate> {
    let p = params.validated()?;
    let d = theta.len();
    if d > MAX_COMPONENTWISE_DIM {
        return Err(Error::InvalidParameter {
            name: "dim",
            reason: "must be at most 10",
        });
    }
    let a = p.half_interval;
    let density = PerturbationDensity::new(a)?;
    let scale = -p.alpha * (-a).exp() * normalizer_c(a)? / (2.0 * a);
    let sample = SupervisedSample::empty(0);
    let mut rng = RngStream::new(p.seed, STREAM_COMPONENTWISE);
    let mut mean = Vec::with_capacity(d);
    let mut se = Vec::with_capacity(d);
    let mut u = vec![0.0; d];
    let mut probe = vec![0.0; d];
    for j in 0..d {
        let mut acc = MeanAccumulator::new(1);
        for _ in 0..p.n {
            fill_uniform(a, &mut u, &mut rng);
            u[j] = density.sample(&mut rng);
            probe.iter_mut().zip(theta.iter().zip(&u)).for_each(|(o, (t, u))| *o = t + u);
            acc.push(&[scale * gradient_or_fd(loss, &probe, &sample)[j]]);
        }
        let e = acc.finish();
        mean.push(e.mean[0]);
        se.push(e.se[0]);
    }
    Ok(Estimate { mean, se })
}

/// The componentwise form against the raw-step mean of [`check_theorem1`]
/// (same seed), per coordinate within `k` combined standard errors.
pub fn check_componentwise<L: LossFunction + ?Sized>(
    loss: &L,
    theta: &[f64],
    params: &IdentityParams,
    k: f64,
) -> Result<CheckReport> {
    let comp = componentwise_mean(loss, theta, params)?;
    let raw = raw_step_mean(loss, theta, params, STREAM_RAW)?;
    let combined = comp.se.iter().zip(&raw.se).map(|(a, b)| a.hypot(*b)).collect();
    Ok(CheckReport::judge(
        "componentwise",
        params.n,
        params.seed,
        comp.mean,
        raw.mean,
        combined,
        Criterion::StandardErrors { k },
    ))
}

/// Mean displacement of [`bnn_zo_step`] from `θ` with a zero baseline and a
/// constant rate `α`, against the quadrature route of the mean step.
pub fn check_bnn_step<L: LossFunction + ?Sized>(
    loss: &L,
    theta: &[f64],
    params: &IdentityParams,
    rel: f64,
) -> Result<CheckReport> {
    let p = params.validated()?;
    let d = theta.len();
    let oracle = gradient_form_quadrature(loss, theta, p.half_interval, p.alpha)?;
    let noise = NoiseConfig::new(p.half_interval, d)?;
    let schedule = LearningRateSchedule::constant(p.alpha)?;
    let zero = AnticipatedLossStrategy::zero();
    let sample = SupervisedSample::empty(0);
    let start = RealVector::new(theta.to_vec())?;
    let mut rng = RngStream::new(p.seed, STREAM_RAW);
    let mut acc = MeanAccumulator::new(d);
    let mut u = vec![0.0; d];
    let mut shift = vec![0.0; d];
    // the noise is forced, so the state's own stream is never drawn from
    let fresh = OptimizerState::new(start, 1, RngStream::new(p.seed, STREAM_GRADIENT));
    for _ in 0..p.n {
        fill_uniform(p.half_interval, &mut u, &mut rng);
        let mut state = fresh.clone();
        bnn_zo_step(&mut state, loss, &sample, &schedule, &noise, &zero, Some(&u))?;
        shift
            .iter_mut()
            .zip(state.theta().iter().zip(theta))
            .for_each(|(o, (new, old))| *o = new - old);
        acc.push(&shift);
    }
    let est = acc.finish();
    Ok(CheckReport::judge(
        "bnn-step",
        p.n,
        p.seed,
        est.mean,
        oracle,
        est.se,
        Criterion::ZeroOrRelative { k: 3.0, rel },
    ))
}

/// Mean of `L(θ_prev + U_prev)(e^{-U} - e^{U})` with independent uniform
/// `U_prev`, `U`; the oracle is zero.
pub fn check_zero_mean_prev<L: LossFunction + ?Sized>(
    loss: &L,
    theta_prev: &[f64],
    half_interval: f64,
    n: u64,
    seed: u64,
) -> Result<CheckReport> {
    positive("half_interval", half_interval)?;
    at_least(n, MIN_SAMPLES)?;
    let d = theta_prev.len();
    let sample = SupervisedSample::empty(0);
    let mut prev_rng = RngStream::new(seed, STREAM_PREVIOUS);
    let mut rng = RngStream::new(seed, STREAM_RAW);
    let mut acc = MeanAccumulator::new(d);
    let mut u_prev = vec![0.0; d];
    let mut u = vec![0.0; d];
    let mut probe = vec![0.0; d];
    let mut term = vec![0.0; d];
    for _ in 0..n {
        fill_uniform(half_interval, &mut u_prev, &mut prev_rng);
        fill_uniform(half_interval, &mut u, &mut rng);
        probe
            .iter_mut()
            .zip(theta_prev.iter().zip(&u_prev))
            .for_each(|(o, (t, u))| *o = t + u);
        let l = loss.value(&probe, &sample);
        term.iter_mut().zip(&u).for_each(|(o, u)| *o = l * ((-u).exp() - u.exp()));
        acc.push(&term);
    }
    let est = acc.finish();
    Ok(CheckReport::judge(
        "zero-mean-previous",
        n,
        seed,
        est.mean,
        vec![0.0; d],
        est.se,
        Criterion::StandardErrors { k: 3.0 },
    ))
}
