use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spikezo::optimizers::{run_optimizer, Initialization, Method, Problem, RunConfig, Trace};
use spikezo::{Error, LearningRateSchedule};

use crate::config::{invalid, load, summary_path, write_json};
use crate::{CliError, CommonArgs};

const DEFAULT_OUT: &str = "optimize_trace.csv";
pub const TRACE_HEADER: [&str; 5] = ["method", "replicate", "iter", "loss", "theta_norm"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeConfig {
    pub problem: Problem,
    pub methods: Vec<Method>,
    pub schedule: LearningRateSchedule,
    pub iterations: u64,
    #[serde(default = "one")]
    pub replicates: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub init: Initialization,
}

fn one() -> usize {
    1
}

impl OptimizeConfig {
    /// Averaged plasticity-rule run on `‖3·1 - θ‖²`, d = 10, from a
    /// standard-normal start.
    pub fn pinned() -> Self {
        Self {
            problem: Problem::LeastSquares {
                target: spikezo::RealVector::filled(10, 3.0).expect("finite target"),
            },
            methods: vec![Method::Bnn {
                half_interval: 1.0,
                strategy: spikezo::optimizers::AnticipatedLossStrategy::previous(),
            }],
            schedule: LearningRateSchedule::Constant { alpha0: 0.01 },
            iterations: 500,
            replicates: 64,
            seed: 2026,
            init: Initialization::StandardNormal,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.problem
            .clone()
            .validated()
            .map_err(|e| invalid("problem", e))?;
        if self.methods.is_empty() {
            return Err(CliError::Config("methods: at least one method required".into()));
        }
        for (i, m) in self.methods.iter().enumerate() {
            m.validated()
                .map_err(|e| invalid(format_args!("methods[{i}] ({})", m.name()), e))?;
        }
        self.schedule
            .validated()
            .map_err(|e| invalid("schedule", e))?;
        if self.replicates == 0 {
            return Err(CliError::Config("replicates: must be at least 1".into()));
        }
        if let Initialization::Given { theta } = &self.init {
            if theta.dim() != self.problem.dim() {
                return Err(invalid(
                    "init",
                    Error::DimensionMismatch {
                        left: self.problem.dim(),
                        right: theta.dim(),
                    },
                ));
            }
        }
        Ok(())
    }

    fn run_config(&self, parallel: usize) -> RunConfig {
        let mut cfg = RunConfig::new(self.schedule, self.iterations, self.seed);
        cfg.replicates = self.replicates;
        cfg.init = self.init.clone();
        cfg.parallel = parallel;
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub replicates: usize,
    pub iterations: u64,
    pub initial_mean_loss: f64,
    pub final_mean_loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeSummary {
    pub seed: u64,
    pub methods: Vec<MethodSummary>,
}

fn summarize(method: &Method, cfg: &OptimizeConfig, trace: &Trace) -> MethodSummary {
    let initial = trace.mean_loss(0).unwrap_or(f64::NAN);
    MethodSummary {
        method: method.name().to_string(),
        replicates: cfg.replicates,
        iterations: cfg.iterations,
        initial_mean_loss: initial,
        final_mean_loss: trace.mean_loss(cfg.iterations).unwrap_or(initial),
    }
}

fn write_rows(writer: &mut csv::Writer<File>, trace: &Trace) -> Result<(), CliError> {
    for row in &trace.rows {
        writer.write_record(&[
            row.method.to_string(),
            row.replicate.to_string(),
            row.iter.to_string(),
            row.loss.to_string(),
            row.theta_norm.to_string(),
        ])?;
    }
    Ok(())
}

fn open_trace(out: &Path) -> Result<csv::Writer<File>, CliError> {
    let mut writer = csv::Writer::from_path(out)?;
    writer.write_record(TRACE_HEADER)?;
    Ok(writer)
}

pub fn run(args: &CommonArgs) -> Result<(), CliError> {
    let mut config = match &args.config {
        Some(path) => load::<OptimizeConfig>(path)?,
        None => OptimizeConfig::pinned(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    config.validate()?;
    let parallel = args.parallel.unwrap_or(1);
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let run_cfg = config.run_config(parallel);

    let mut writer = open_trace(&out)?;
    let mut summary = OptimizeSummary {
        seed: config.seed,
        methods: Vec::new(),
    };
    for method in &config.methods {
        match run_optimizer(method, &config.problem, &run_cfg) {
            Ok(trace) => {
                write_rows(&mut writer, &trace)?;
                let s = summarize(method, &config, &trace);
                println!(
                    "{}: mean loss {:.6e} -> {:.6e}",
                    s.method, s.initial_mean_loss, s.final_mean_loss
                );
                summary.methods.push(s);
            }
            Err(failure) => {
                write_rows(&mut writer, &failure.partial)?;
                writer.flush()?;
                return Err(CliError::Runtime(format!(
                    "method {}, replicate {}: {}",
                    method.name(),
                    failure.replicate,
                    failure.error
                )));
            }
        }
    }
    writer.flush()?;
    write_json(&summary_path(&out), &summary)?;
    Ok(())
}
