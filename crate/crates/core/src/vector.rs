//! Dense real vectors and the componentwise operations the update rules use.

use std::ops::Index;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A non-empty vector of finite `f64` components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct RealVector(Vec<f64>);

/// Sign of the exponent in [`exp_map`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl RealVector {
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some(index) = components.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self(components))
    }

    pub fn filled(dim: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; dim])
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::filled(dim, 0.0)
    }

    pub fn ones(dim: usize) -> Result<Self> {
        Self::filled(dim, 1.0)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &RealVector) -> Result<f64> {
        check_dims(self.dim(), other.dim())?;
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum())
    }
}

impl TryFrom<Vec<f64>> for RealVector {
    type Error = Error;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<RealVector> for Vec<f64> {
    fn from(value: RealVector) -> Self {
        value.0
    }
}

impl Index<usize> for RealVector {
    type Output = f64;

    fn index(&self, index: usize) -> &f64 {
        &self.0[index]
    }
}

pub(crate) fn check_dims(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { left, right })
    }
}

/// Componentwise (Hadamard) product `a ⊙ b`.
pub fn hadamard(a: &RealVector, b: &RealVector) -> Result<RealVector> {
    check_dims(a.dim(), b.dim())?;
    RealVector::new(a.iter().zip(b.iter()).map(|(x, y)| x * y).collect())
}

/// Componentwise `e^{±v_j}`; fails on the first component that overflows.
pub fn exp_map(v: &RealVector, sign: Sign) -> Result<RealVector> {
    let s = sign.factor();
    let out = v
        .iter()
        .enumerate()
        .map(|(index, x)| {
            let e = (s * x).exp();
            if e.is_finite() {
                Ok(e)
            } else {
                Err(Error::Overflow { index })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RealVector(out))
}
