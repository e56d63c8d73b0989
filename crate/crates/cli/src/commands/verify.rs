use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use spikezo::optimizers::GaussianNoiseConfig;
use spikezo::verification::{
    check_bnn_step, check_componentwise, check_density_mass, check_density_sampler, check_normalizer,
    check_stein, check_theorem1, check_zero_mean_prev, divergence_demo, CheckReport, Criterion,
    DivergenceConfig, IdentityParams, MAX_COMPONENTWISE_DIM, MAX_QUADRATURE_DIM, MIN_SAMPLES,
};
use spikezo::{Error, RealVector};

use crate::config::{invalid, load, write_json, LossSpec};
use crate::{CliError, CommonArgs};

const DEFAULT_OUT: &str = "verify_report.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default)]
    pub seed: u64,
    pub checks: Vec<CheckSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CheckSpec {
    Normalizer {
        half_intervals: Vec<f64>,
    },
    DensityMass {
        half_intervals: Vec<f64>,
    },
    DensitySampler {
        half_interval: f64,
        n: u64,
    },
    Stein {
        target: Vec<f64>,
        theta: Vec<f64>,
        sigma2: f64,
        n: u64,
    },
    Theorem1 {
        loss: LossSpec,
        theta: Vec<f64>,
        half_interval: f64,
        alpha: f64,
        n: u64,
        #[serde(default = "yes")]
        quadrature: bool,
        criterion: Criterion,
    },
    Componentwise {
        loss: LossSpec,
        theta: Vec<f64>,
        half_interval: f64,
        alpha: f64,
        n: u64,
        #[serde(default = "three")]
        k: f64,
    },
    BnnStep {
        loss: LossSpec,
        theta: Vec<f64>,
        half_interval: f64,
        alpha: f64,
        n: u64,
        rel: f64,
    },
    ZeroMeanPrevious {
        loss: LossSpec,
        theta_prev: Vec<f64>,
        half_interval: f64,
        n: u64,
    },
    /// Runs with its own pinned seed; the top-level seed does not apply.
    Divergence {
        dim: usize,
        init: f64,
        alpha: f64,
        sigma2: f64,
        iterations: u64,
        seed: u64,
    },
}

fn yes() -> bool {
    true
}

fn three() -> f64 {
    3.0
}

/// Report file layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub pass: bool,
    pub reports: Vec<CheckReport>,
}

impl VerifyConfig {
    /// The suite run when no config is given.
    pub fn default_suite() -> Self {
        let ls = |target: &[f64]| LossSpec::LeastSquares {
            target: target.to_vec(),
        };
        let grid = vec![0.1, 0.5, 1.0, 2.0];
        let pinned = DivergenceConfig::pinned();
        let mut checks = vec![
            CheckSpec::Normalizer {
                half_intervals: grid.clone(),
            },
            CheckSpec::DensityMass {
                half_intervals: grid.clone(),
            },
        ];
        checks.extend(grid.iter().map(|&a| CheckSpec::DensitySampler {
            half_interval: a,
            n: 100_000,
        }));
        checks.extend([
            CheckSpec::Stein {
                target: vec![1.0, -0.5, 2.0, 0.3, -1.2],
                theta: vec![0.2, 0.4, -0.6, 1.1, 0.0],
                sigma2: 1.0,
                n: 1_000_000,
            },
            CheckSpec::Stein {
                target: vec![0.7; 5],
                theta: vec![0.7; 5],
                sigma2: 1.0,
                n: 1_000_000,
            },
            CheckSpec::Theorem1 {
                loss: ls(&[1.0]),
                theta: vec![0.0],
                half_interval: 1.0,
                alpha: 1.0,
                n: 1_000_000,
                quadrature: true,
                criterion: Criterion::ZeroOrRelative { k: 3.0, rel: 0.02 },
            },
            CheckSpec::Theorem1 {
                loss: LossSpec::Quartic { center: vec![0.0] },
                theta: vec![1.0],
                half_interval: 1.0,
                alpha: 1.0,
                n: 1_000_000,
                quadrature: true,
                criterion: Criterion::StandardErrors { k: 3.0 },
            },
            CheckSpec::Componentwise {
                loss: ls(&[0.8, -1.3, 0.4]),
                theta: vec![-0.2, 0.5, 0.9],
                half_interval: 1.0,
                alpha: 1.0,
                n: 1_000_000,
                k: 3.0,
            },
            CheckSpec::BnnStep {
                loss: ls(&[1.0]),
                theta: vec![0.0],
                half_interval: 1.0,
                alpha: 1.0,
                n: 1_000_000,
                rel: 0.02,
            },
            CheckSpec::ZeroMeanPrevious {
                loss: ls(&[3.0, 1.0]),
                theta_prev: vec![0.0, 0.0],
                half_interval: 1.0,
                n: 1_000_000,
            },
            CheckSpec::ZeroMeanPrevious {
                loss: LossSpec::Quartic {
                    center: vec![0.5, -0.5],
                },
                theta_prev: vec![1.0, 0.2],
                half_interval: 1.0,
                n: 1_000_000,
            },
            CheckSpec::Divergence {
                dim: pinned.dim,
                init: pinned.init,
                alpha: pinned.alpha,
                sigma2: pinned.sigma2,
                iterations: pinned.iterations,
                seed: pinned.seed,
            },
        ]);
        Self { seed: 0, checks }
    }
}

fn positive(name: &'static str, v: f64) -> Result<(), Error> {
    spikezo::error::positive(name, v).map(|_| ())
}

fn samples(n: u64, min: u64) -> Result<(), Error> {
    if n < min {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "too small for this check",
        });
    }
    Ok(())
}

fn same_dim(loss: &LossSpec, theta: &[f64]) -> Result<(), Error> {
    RealVector::new(theta.to_vec())?;
    loss.build()?;
    match loss.dim() {
        Some(d) if d != theta.len() => Err(Error::DimensionMismatch {
            left: d,
            right: theta.len(),
        }),
        _ => Ok(()),
    }
}

impl CheckSpec {
    pub fn name(&self) -> &'static str {
        match self {
            CheckSpec::Normalizer { .. } => "normalizer",
            CheckSpec::DensityMass { .. } => "density-mass",
            CheckSpec::DensitySampler { .. } => "density-sampler",
            CheckSpec::Stein { .. } => "stein",
            CheckSpec::Theorem1 { .. } => "theorem1",
            CheckSpec::Componentwise { .. } => "componentwise",
            CheckSpec::BnnStep { .. } => "bnn-step",
            CheckSpec::ZeroMeanPrevious { .. } => "zero-mean-previous",
            CheckSpec::Divergence { .. } => "divergence",
        }
    }

    /// Checks every precondition without running anything.
    pub fn validate(&self) -> Result<(), Error> {
        match self {
            CheckSpec::Normalizer { half_intervals } | CheckSpec::DensityMass { half_intervals } => {
                if half_intervals.is_empty() {
                    return Err(Error::EmptyVector);
                }
                half_intervals.iter().try_for_each(|&a| positive("half_interval", a))
            }
            CheckSpec::DensitySampler { half_interval, n } => {
                positive("half_interval", *half_interval)?;
                samples(*n, 1000)
            }
            CheckSpec::Stein {
                target,
                theta,
                sigma2,
                n,
            } => {
                let t = RealVector::new(target.clone())?;
                let th = RealVector::new(theta.clone())?;
                if t.dim() != th.dim() {
                    return Err(Error::DimensionMismatch {
                        left: t.dim(),
                        right: th.dim(),
                    });
                }
                GaussianNoiseConfig::canonical(*sigma2)?;
                samples(*n, MIN_SAMPLES)
            }
            CheckSpec::Theorem1 {
                loss,
                theta,
                half_interval,
                alpha,
                n,
                quadrature,
                ..
            } => {
                same_dim(loss, theta)?;
                positive("half_interval", *half_interval)?;
                positive("alpha", *alpha)?;
                if *quadrature && theta.len() > MAX_QUADRATURE_DIM {
                    return Err(Error::QuadratureDimension(theta.len()));
                }
                samples(*n, 2)
            }
            CheckSpec::Componentwise {
                loss,
                theta,
                half_interval,
                alpha,
                n,
                k,
            } => {
                same_dim(loss, theta)?;
                positive("half_interval", *half_interval)?;
                positive("alpha", *alpha)?;
                positive("k", *k)?;
                if theta.len() > MAX_COMPONENTWISE_DIM {
                    return Err(Error::InvalidParameter {
                        name: "theta",
                        reason: "must have at most 10 coordinates",
                    });
                }
                samples(*n, 2)
            }
            CheckSpec::BnnStep {
                loss,
                theta,
                half_interval,
                alpha,
                n,
                rel,
            } => {
                same_dim(loss, theta)?;
                positive("half_interval", *half_interval)?;
                positive("alpha", *alpha)?;
                positive("rel", *rel)?;
                if theta.len() > MAX_QUADRATURE_DIM {
                    return Err(Error::QuadratureDimension(theta.len()));
                }
                samples(*n, 2)
            }
            CheckSpec::ZeroMeanPrevious {
                loss,
                theta_prev,
                half_interval,
                n,
            } => {
                same_dim(loss, theta_prev)?;
                positive("half_interval", *half_interval)?;
                samples(*n, MIN_SAMPLES)
            }
            CheckSpec::Divergence { .. } => self.divergence_config().map(|_| ()),
        }
    }

    fn divergence_config(&self) -> Result<DivergenceConfig, Error> {
        match *self {
            CheckSpec::Divergence {
                dim,
                init,
                alpha,
                sigma2,
                iterations,
                seed,
            } => DivergenceConfig {
                dim,
                init,
                alpha,
                sigma2,
                iterations,
                seed,
            }
            .validated(),
            _ => unreachable!("not a divergence check"),
        }
    }

    pub fn run(&self, seed: u64) -> Result<Vec<CheckReport>, Error> {
        let params = |half_interval: f64, alpha: f64, n: u64| IdentityParams {
            half_interval,
            alpha,
            n,
            seed,
        };
        Ok(match self {
            CheckSpec::Normalizer { half_intervals } => vec![check_normalizer(half_intervals)?],
            CheckSpec::DensityMass { half_intervals } => vec![check_density_mass(half_intervals)?],
            CheckSpec::DensitySampler { half_interval, n } => {
                vec![check_density_sampler(*half_interval, *n, seed)?]
            }
            CheckSpec::Stein {
                target,
                theta,
                sigma2,
                n,
            } => vec![check_stein(
                &RealVector::new(target.clone())?,
                &RealVector::new(theta.clone())?,
                *sigma2,
                *n,
                seed,
            )?],
            CheckSpec::Theorem1 {
                loss,
                theta,
                half_interval,
                alpha,
                n,
                quadrature,
                criterion,
            } => check_theorem1(&loss.build()?, theta, &params(*half_interval, *alpha, *n), *quadrature)?
                .reports(*criterion),
            CheckSpec::Componentwise {
                loss,
                theta,
                half_interval,
                alpha,
                n,
                k,
            } => vec![check_componentwise(&loss.build()?, theta, &params(*half_interval, *alpha, *n), *k)?],
            CheckSpec::BnnStep {
                loss,
                theta,
                half_interval,
                alpha,
                n,
                rel,
            } => vec![check_bnn_step(&loss.build()?, theta, &params(*half_interval, *alpha, *n), *rel)?],
            CheckSpec::ZeroMeanPrevious {
                loss,
                theta_prev,
                half_interval,
                n,
            } => vec![check_zero_mean_prev(&loss.build()?, theta_prev, *half_interval, *n, seed)?],
            CheckSpec::Divergence { .. } => {
                let cfg = self.divergence_config()?;
                let trace = divergence_demo(&cfg)?;
                let initial = trace.initial_loss();
                vec![CheckReport::from_parts(
                    "divergence",
                    cfg.iterations,
                    cfg.seed,
                    vec![trace.one_point_final() / initial, trace.gd_final() / initial],
                    vec![10.0, 0.1],
                    vec![0.0, 0.0],
                    trace.diverged() && trace.gd_converged() && trace.gd_monotone(),
                )]
            }
        })
    }
}

/// Seed of the `index`-th check.
pub fn check_seed(base: u64, index: usize) -> u64 {
    base.wrapping_add(index as u64)
}

pub fn run(args: &CommonArgs) -> Result<(), CliError> {
    let mut config = match &args.config {
        Some(path) => load::<VerifyConfig>(path)?,
        None => VerifyConfig::default_suite(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if config.checks.is_empty() {
        return Err(CliError::Config("checks: at least one check required".into()));
    }
    for (i, check) in config.checks.iter().enumerate() {
        check
            .validate()
            .map_err(|e| invalid(format_args!("checks[{i}] ({})", check.name()), e))?;
    }

    let mut reports = Vec::new();
    for (i, check) in config.checks.iter().enumerate() {
        let batch = check
            .run(check_seed(config.seed, i))
            .map_err(|e| CliError::Runtime(format!("checks[{i}] ({}): {e}", check.name())))?;
        for r in &batch {
            println!("{} {}", if r.pass { "PASS" } else { "FAIL" }, r.name);
        }
        reports.extend(batch);
    }
    let failed = reports.iter().filter(|r| !r.pass).count();
    let report = VerifyReport {
        seed: config.seed,
        pass: failed == 0,
        reports,
    };
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    write_json(&out, &report)?;
    if failed > 0 {
        return Err(CliError::ChecksFailed(failed));
    }
    Ok(())
}
