//! Loading configs and writing outputs, shared by all commands.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use spikezo::losses::{ConstantLoss, LeastSquares, Quartic};
use spikezo::{LossFunction, RealVector};

use crate::CliError;

/// Reads and parses a JSON config. Unknown fields are rejected by the
/// config types themselves.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

pub fn parse<T: DeserializeOwned>(text: &str) -> Result<T, serde_json::Error> {
    serde_json::from_str(text)
}

/// Wraps a validation error with the config location it came from.
pub fn invalid(context: impl std::fmt::Display, err: spikezo::Error) -> CliError {
    CliError::Config(format!("{context}: {err}"))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Runtime(format!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

/// `trace.csv` -> `trace.summary.json`.
pub fn summary_path(out: &Path) -> PathBuf {
    out.with_extension("summary.json")
}

/// A loss with a fixed target, as used by the identity checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LossSpec {
    /// `‖y - v‖²`
    LeastSquares { target: Vec<f64> },
    /// `Σ (v - c)⁴`
    Quartic { center: Vec<f64> },
    /// `L ≡ value`
    Constant { value: f64 },
}

impl LossSpec {
    /// Dimension the loss expects, `None` for a constant.
    pub fn dim(&self) -> Option<usize> {
        match self {
            LossSpec::LeastSquares { target } => Some(target.len()),
            LossSpec::Quartic { center } => Some(center.len()),
            LossSpec::Constant { .. } => None,
        }
    }

    pub fn build(&self) -> Result<Box<dyn LossFunction>, spikezo::Error> {
        Ok(match self {
            LossSpec::LeastSquares { target } => Box::new(LeastSquares::new(RealVector::new(target.clone())?)),
            LossSpec::Quartic { center } => Box::new(Quartic::new(RealVector::new(center.clone())?)),
            LossSpec::Constant { value } => {
                if !value.is_finite() {
                    return Err(spikezo::Error::NonFinite { index: 0 });
                }
                Box::new(ConstantLoss(*value))
            }
        })
    }
}
