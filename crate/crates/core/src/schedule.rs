use serde::{Deserialize, Serialize};

use crate::error::{nonnegative, Error, Result};

/// Learning-rate schedule `α_k`, `k >= 1`.
///
/// `alpha0 = 0` is accepted and freezes the iterate; it is used for
/// control runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LearningRateSchedule {
    Constant { alpha0: f64 },
    /// `α_k = alpha0 / k^p`
    PowerDecay { alpha0: f64, p: f64 },
}

impl Default for LearningRateSchedule {
    fn default() -> Self {
        LearningRateSchedule::Constant { alpha0: 0.01 }
    }
}

impl LearningRateSchedule {
    pub fn constant(alpha0: f64) -> Result<Self> {
        Self::Constant { alpha0 }.validated()
    }

    pub fn power_decay(alpha0: f64, p: f64) -> Result<Self> {
        Self::PowerDecay { alpha0, p }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        match self {
            Self::Constant { alpha0 } => {
                nonnegative("alpha0", alpha0)?;
            }
            Self::PowerDecay { alpha0, p } => {
                nonnegative("alpha0", alpha0)?;
                nonnegative("p", p)?;
            }
        }
        Ok(self)
    }

    /// Rate for iteration `k` (1-based).
    pub fn rate(&self, k: u64) -> Result<f64> {
        if k == 0 {
            return Err(Error::InvalidParameter {
                name: "k",
                reason: "must be at least 1",
            });
        }
        Ok(match *self {
            Self::Constant { alpha0 } => alpha0,
            Self::PowerDecay { alpha0, p } => alpha0 / (k as f64).powf(p),
        })
    }
}
