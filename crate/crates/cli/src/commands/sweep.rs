use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use spikezo::verification::variance_scaling_sweep;
use spikezo::Error;

use crate::config::{invalid, load, summary_path, write_json};
use crate::{CliError, CommonArgs};

const DEFAULT_OUT: &str = "sweep.csv";
pub const SWEEP_HEADER: [&str; 4] = ["d", "quantity", "value", "se"];
pub const INSUFFICIENT: &str = "insufficient points";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub dims: Vec<usize>,
    pub sigma2: f64,
    pub n: u64,
    #[serde(default)]
    pub seed: u64,
}

impl SweepConfig {
    /// Five dimensions spanning two decades, 1e5 draws each.
    pub fn pinned() -> Self {
        Self {
            dims: vec![10, 32, 100, 316, 1000],
            sigma2: 1.0,
            n: 100_000,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.dims.is_empty() {
            return Err(CliError::Config("dims: at least one dimension required".into()));
        }
        if self.dims.contains(&0) {
            return Err(CliError::Config("dims: dimensions must be positive".into()));
        }
        spikezo::error::positive("sigma2", self.sigma2).map_err(|e| invalid("sweep", e))?;
        if self.n < 4 {
            return Err(invalid(
                "sweep",
                Error::InvalidParameter {
                    name: "n",
                    reason: "must be at least 4",
                },
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub quantity: String,
    pub dims: Vec<usize>,
    pub slope: Option<f64>,
    pub status: String,
}

pub fn run(args: &CommonArgs) -> Result<(), CliError> {
    let mut config = match &args.config {
        Some(path) => load::<SweepConfig>(path)?,
        None => SweepConfig::pinned(),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    config.validate()?;
    let out = args.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));

    let sweep = variance_scaling_sweep(&config.dims, config.sigma2, config.n, config.seed)
        .map_err(|e| CliError::Runtime(format!("sweep: {e}")))?;
    let mut writer = csv::Writer::from_path(&out)?;
    writer.write_record(SWEEP_HEADER)?;
    for p in &sweep.points {
        writer.write_record(&[
            p.d.to_string(),
            "variance".to_string(),
            p.variance.to_string(),
            p.se.to_string(),
        ])?;
    }
    writer.flush()?;

    let summary = SweepSummary {
        quantity: "variance".into(),
        dims: config.dims.clone(),
        slope: sweep.slope,
        status: match sweep.slope {
            Some(_) => "ok".into(),
            None => INSUFFICIENT.into(),
        },
    };
    match sweep.slope {
        Some(s) => println!("log-log slope {s:.4}"),
        None => println!("slope undefined: {INSUFFICIENT}"),
    }
    write_json(&summary_path(&out), &summary)
}
