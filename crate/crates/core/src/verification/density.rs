//! Checks on the timing density `f_A`: its normalizer, its mass, and the
//! rejection sampler.

use super::report::CheckReport;
use crate::error::{Error, Result};
use crate::perturbation::{normalizer_c, timing_weight, PerturbationDensity};
use crate::quadrature::integrate;
use crate::rng::RngStream;

pub const CHI_SQUARE_BINS: usize = 20;
/// Upper 1e-3 quantile of the chi-square distribution with 19 degrees of
/// freedom.
pub const CHI_SQUARE_CRITICAL: f64 = 43.820_195_964_517_53;

const QUADRATURE_TOL: f64 = 1e-13;

/// `C(A)` from the closed form against quadrature of the unnormalized
/// weight, `1e-9` relative.
pub fn check_normalizer(half_intervals: &[f64]) -> Result<CheckReport> {
    let closed = half_intervals.iter().map(|&a| normalizer_c(a)).collect::<Result<Vec<_>>>()?;
    let quad: Vec<f64> = half_intervals
        .iter()
        .map(|&a| integrate(|x| timing_weight(a, x), -a, a, QUADRATURE_TOL * normalizer_c(a).unwrap_or(1.0)).value)
        .collect();
    let pass = closed.iter().zip(&quad).all(|(c, q)| ((c - q) / q).abs() <= 1e-9);
    Ok(CheckReport::from_parts(
        "normalizer",
        0,
        0,
        closed,
        quad,
        vec![0.0; half_intervals.len()],
        pass,
    ))
}

/// `∫ f_A = 1` by quadrature, `1e-9` absolute.
pub fn check_density_mass(half_intervals: &[f64]) -> Result<CheckReport> {
    let mass = half_intervals
        .iter()
        .map(|&a| {
            let density = PerturbationDensity::new(a)?;
            Ok(integrate(|x| density.density(x), -a, a, QUADRATURE_TOL).value)
        })
        .collect::<Result<Vec<_>>>()?;
    let pass = mass.iter().all(|m| (m - 1.0).abs() <= 1e-9);
    Ok(CheckReport::from_parts(
        "density-mass",
        0,
        0,
        mass,
        vec![1.0; half_intervals.len()],
        vec![0.0; half_intervals.len()],
        pass,
    ))
}

/// Pearson statistic of `n` sampler draws over 20 equal-width bins on
/// `[-A, A]`, with expected counts from quadrature of `f_A`. Passes below
/// the 1e-3 critical value. The estimate is the statistic, the oracle the
/// critical value.
pub fn check_density_sampler(half_interval: f64, n: u64, seed: u64) -> Result<CheckReport> {
    let density = PerturbationDensity::new(half_interval)?;
    if n < 1000 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "must be at least 1000",
        });
    }
    let a = half_interval;
    let width = 2.0 * a / CHI_SQUARE_BINS as f64;
    let mut counts = [0u64; CHI_SQUARE_BINS];
    let mut rng = RngStream::new(seed, 0);
    for _ in 0..n {
        let x = density.sample(&mut rng);
        let bin = (((x + a) / width) as usize).min(CHI_SQUARE_BINS - 1);
        counts[bin] += 1;
    }
    let statistic: f64 = counts
        .iter()
        .enumerate()
        .map(|(b, &observed)| {
            let lo = -a + b as f64 * width;
            let p = integrate(|x| density.density(x), lo, lo + width, QUADRATURE_TOL).value;
            let expected = p * n as f64;
            (observed as f64 - expected).powi(2) / expected
        })
        .sum();
    Ok(CheckReport::from_parts(
        format!("density-sampler/A={a}"),
        n,
        seed,
        vec![statistic],
        vec![CHI_SQUARE_CRITICAL],
        vec![0.0],
        statistic < CHI_SQUARE_CRITICAL,
    ))
}
