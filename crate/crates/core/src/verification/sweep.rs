//! Variance of the one-point gradient estimate as the dimension grows.

use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};
use crate::rng::RngStream;

/// Per-coordinate offset `y_l - θ_l` used by the sweep.
pub const SWEEP_OFFSET: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariancePoint {
    pub d: usize,
    pub variance: f64,
    pub se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceSweep {
    pub points: Vec<VariancePoint>,
    /// Least-squares slope of `ln variance` against `ln d`; `None` with
    /// fewer than two distinct dimensions.
    pub slope: Option<f64>,
}

/// Sample variance and its standard error for the first coordinate of
/// `σ^{-2} L(θ + ξ) ξ`, `L(v) = ‖y - v‖²`, `y - θ = SWEEP_OFFSET · 1`.
pub fn estimator_variance(d: usize, sigma2: f64, n: u64, rng: &mut RngStream) -> Result<VariancePoint> {
    positive("sigma2", sigma2)?;
    if d == 0 {
        return Err(Error::EmptyVector);
    }
    if n < 4 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "must be at least 4",
        });
    }
    let sd = sigma2.sqrt();
    let draws: Vec<f64> = (0..n)
        .map(|_| {
            let first = rng.normal(sd);
            let rest: f64 = (1..d).map(|_| (SWEEP_OFFSET - rng.normal(sd)).powi(2)).sum();
            ((SWEEP_OFFSET - first).powi(2) + rest) * first / sigma2
        })
        .collect();
    let m = n as f64;
    let mean = draws.iter().sum::<f64>() / m;
    let (m2, m4) = draws.iter().fold((0.0, 0.0), |(s2, s4), z| {
        let c = (z - mean).powi(2);
        (s2 + c, s4 + c * c)
    });
    let variance = m2 / (m - 1.0);
    let fourth = m4 / m;
    let se = ((fourth - variance * variance).max(0.0) / m).sqrt();
    Ok(VariancePoint { d, variance, se })
}

/// Slope of the least-squares line through `(ln d, ln variance)`.
pub fn log_log_slope(points: &[VariancePoint]) -> Option<f64> {
    let mut dims: Vec<usize> = points.iter().map(|p| p.d).collect();
    dims.sort_unstable();
    dims.dedup();
    if dims.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.d as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.variance.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// One substream of `seed` per entry of `dims`.
pub fn variance_scaling_sweep(dims: &[usize], sigma2: f64, n: u64, seed: u64) -> Result<VarianceSweep> {
    let points = dims
        .iter()
        .enumerate()
        .map(|(i, &d)| estimator_variance(d, sigma2, n, &mut RngStream::new(seed, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let slope = log_log_slope(&points);
    Ok(VarianceSweep { points, slope })
}
