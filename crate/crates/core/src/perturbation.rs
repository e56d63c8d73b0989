//! Spike-timing noise.
//!
//! Arrival offsets `U` are uniform on `[-A, A]`. The mean step of the
//! plasticity rule is a gradient average against the weight
//! `(e^A - e^u)(e^A - e^{-u})`, which normalizes to the density
//! [`PerturbationDensity`] on `[-A, A]`.

use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};
use crate::rng::RngStream;
use crate::vector::RealVector;

/// Half-width `A` of the offset interval and the number of edges `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub half_interval: f64,
    pub dim: usize,
}

impl NoiseConfig {
    pub fn new(half_interval: f64, dim: usize) -> Result<Self> {
        Self { half_interval, dim }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        positive("half_interval", self.half_interval)?;
        if self.dim == 0 {
            return Err(Error::InvalidParameter {
                name: "dim",
                reason: "must be at least 1",
            });
        }
        Ok(self)
    }
}

/// `d` independent draws from `U[-A, A]`.
pub fn sample_uniform(cfg: &NoiseConfig, rng: &mut RngStream) -> Result<RealVector> {
    let cfg = cfg.validated()?;
    let mut out = vec![0.0; cfg.dim];
    fill_uniform(cfg.half_interval, &mut out, rng);
    RealVector::new(out)
}

pub(crate) fn fill_uniform(a: f64, out: &mut [f64], rng: &mut RngStream) {
    for u in out {
        *u = rng.uniform_symmetric(a);
    }
}

/// `C(A) = ∫_{-A}^{A} (e^A - e^x)(e^A - e^{-x}) dx = 2A(e^{2A}+1) + 2 - 2e^{2A}`.
///
/// The closed form cancels catastrophically as `A -> 0`, where
/// `C(A) ~ 4A³/3`; below `A = 0.5` the positive series
/// `Σ_{m>=3} (m-2)(2A)^m / m!` is summed instead.
pub fn normalizer_c(a: f64) -> Result<f64> {
    positive("half_interval", a)?;
    if a >= 0.5 {
        let e2a = (2.0 * a).exp();
        return Ok(2.0 * a * (e2a + 1.0) + 2.0 - 2.0 * e2a);
    }
    let x = 2.0 * a;
    // term_m = x^m / m!
    let mut term = x * x * x / 6.0;
    let mut sum = 0.0;
    for m in 3..60u32 {
        let add = f64::from(m - 2) * term;
        sum += add;
        if add <= sum * f64::EPSILON {
            break;
        }
        term *= x / f64::from(m + 1);
    }
    Ok(sum)
}

/// Unnormalized weight `(e^A - e^x)(e^A - e^{-x})`, written as
/// `expm1(A - x)·expm1(A + x)` to stay accurate for small `A`.
pub fn timing_weight(a: f64, x: f64) -> f64 {
    (a - x).exp_m1() * (a + x).exp_m1()
}

/// The density `f_A(x) = C(A)^{-1} (e^A - e^x)(e^A - e^{-x}) 1(|x| <= A)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationDensity {
    half_interval: f64,
    normalizer: f64,
    peak_weight: f64,
}

impl PerturbationDensity {
    pub fn new(half_interval: f64) -> Result<Self> {
        let normalizer = normalizer_c(half_interval)?;
        Ok(Self {
            half_interval,
            normalizer,
            peak_weight: timing_weight(half_interval, 0.0),
        })
    }

    pub fn half_interval(&self) -> f64 {
        self.half_interval
    }

    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    pub fn density(&self, x: f64) -> f64 {
        if x.abs() > self.half_interval {
            return 0.0;
        }
        (timing_weight(self.half_interval, x) / self.normalizer).max(0.0)
    }

    /// Maximum of the density, attained at 0.
    pub fn peak(&self) -> f64 {
        self.peak_weight / self.normalizer
    }

    /// Probability that one uniform proposal is accepted by [`Self::sample`].
    pub fn acceptance_probability(&self) -> f64 {
        self.normalizer / (2.0 * self.half_interval * self.peak_weight)
    }

    /// Rejection sampler: uniform proposals on `[-A, A]` under the envelope
    /// `f_A(0)`.
    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        self.sample_counted(rng).0
    }

    /// Like [`Self::sample`], also returning how many proposals were drawn.
    pub fn sample_counted(&self, rng: &mut RngStream) -> (f64, u64) {
        let mut proposals = 0;
        loop {
            proposals += 1;
            let x = rng.uniform_symmetric(self.half_interval);
            let accept = rng.uniform01() * self.peak_weight;
            if accept < timing_weight(self.half_interval, x) {
                return (x, proposals);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;
    use proptest::prelude::*;

    fn quadrature_c(a: f64) -> f64 {
        integrate(
            |x| (a.exp() - x.exp()) * (a.exp() - (-x).exp()),
            -a,
            a,
            1e-14,
        )
        .value
    }

    #[test]
    fn normalizer_at_one_is_four() {
        assert!((normalizer_c(1.0).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn normalizer_matches_quadrature() {
        for a in [0.01, 0.1, 0.3, 0.5, 1.0, 2.0, 3.0] {
            let closed = normalizer_c(a).unwrap();
            let quad = quadrature_c(a);
            assert!(((closed - quad) / quad).abs() < 1e-9, "A={a}: {closed} vs {quad}");
        }
    }

    #[test]
    fn normalizer_small_a_taylor() {
        let c = normalizer_c(0.01).unwrap();
        // 4A³/3 + 4A⁴/3 + O(A⁵)
        let taylor = 4.0 / 3.0 * (0.01f64.powi(3) + 0.01f64.powi(4));
        assert!(((c - taylor) / taylor).abs() < 1e-3);
    }

    #[test]
    fn series_and_closed_form_agree_at_switch() {
        let a = 0.5f64;
        let e2a = (2.0 * a).exp();
        let closed = 2.0 * a * (e2a + 1.0) + 2.0 - 2.0 * e2a;
        let below = normalizer_c(a - 1e-12).unwrap();
        assert!(((closed - below) / closed).abs() < 1e-10);
    }

    #[test]
    fn normalizer_rejects_nonpositive() {
        let err = normalizer_c(0.0).unwrap_err();
        assert_eq!(err.to_string(), "half_interval must be positive");
        assert!(normalizer_c(-1.0).is_err());
        assert!(PerturbationDensity::new(0.0).is_err());
    }

    #[test]
    fn density_examples() {
        let pd = PerturbationDensity::new(1.0).unwrap();
        assert_eq!(pd.density(1.0), 0.0);
        assert_eq!(pd.density(-1.0), 0.0);
        assert_eq!(pd.density(1.5), 0.0);
        let expected = (1f64.exp() - 1.0).powi(2) / 4.0;
        assert!((pd.density(0.0) - expected).abs() < 1e-15);
        assert!((pd.density(0.0) - 0.738_123_1).abs() < 1e-7);
    }

    #[test]
    fn density_integrates_to_one() {
        for a in [0.1, 0.5, 1.0, 2.0] {
            let pd = PerturbationDensity::new(a).unwrap();
            let mass = integrate(|x| pd.density(x), -a, a, 1e-12).value;
            assert!((mass - 1.0).abs() < 1e-9, "A={a}: {mass}");
        }
    }

    #[test]
    fn normalizer_increasing() {
        let mut prev = 0.0;
        for i in 1..=400 {
            let c = normalizer_c(f64::from(i) * 0.01).unwrap();
            assert!(c > prev);
            prev = c;
        }
    }

    #[test]
    fn uniform_support_and_mean() {
        let cfg = NoiseConfig::new(1.0, 5).unwrap();
        let mut rng = RngStream::new(11, 0);
        let u = sample_uniform(&cfg, &mut rng).unwrap();
        assert!(u.iter().all(|x| x.abs() <= 1.0));

        let n = 1_000_000;
        let mut buf = [0.0];
        let mut sum = 0.0;
        for _ in 0..n {
            fill_uniform(1.0, &mut buf, &mut rng);
            sum += buf[0];
        }
        let se = 1.0 / (3.0 * n as f64).sqrt();
        assert!((sum / n as f64).abs() < 3.0 * se);
    }

    #[test]
    fn tiny_half_interval_shrinks_draws() {
        let cfg = NoiseConfig::new(1e-9, 4).unwrap();
        let u = sample_uniform(&cfg, &mut RngStream::new(1, 1)).unwrap();
        assert!(u.iter().all(|x| x.abs() <= 1e-9));
    }

    #[test]
    fn invalid_noise_config() {
        assert!(NoiseConfig::new(0.0, 3).is_err());
        assert!(NoiseConfig::new(1.0, 0).is_err());
    }

    #[test]
    fn rejection_rate_matches_prediction() {
        let pd = PerturbationDensity::new(1.0).unwrap();
        let mut rng = RngStream::new(5, 2);
        let n = 200_000u64;
        let proposals: u64 = (0..n).map(|_| pd.sample_counted(&mut rng).1).sum();
        let p = pd.acceptance_probability();
        // proposals per sample is geometric with mean 1/p, variance (1-p)/p²
        let mean = proposals as f64 / n as f64;
        let se = ((1.0 - p) / (p * p) / n as f64).sqrt();
        assert!((mean - 1.0 / p).abs() < 4.0 * se, "{mean} vs {}", 1.0 / p);
    }

    proptest! {
        #[test]
        fn density_is_even(a in 0.01f64..3.0, t in -1.5f64..1.5) {
            let pd = PerturbationDensity::new(a).unwrap();
            let x = t * a;
            prop_assert!((pd.density(x) - pd.density(-x)).abs() <= 1e-12 * pd.peak());
        }

        #[test]
        fn weight_nonnegative_on_support(a in 0.01f64..3.0, t in -1.0f64..=1.0) {
            prop_assert!(timing_weight(a, t * a) >= 0.0);
        }

        #[test]
        fn samples_stay_in_support(a in 0.01f64..3.0, seed in any::<u64>()) {
            let pd = PerturbationDensity::new(a).unwrap();
            let mut rng = RngStream::new(seed, 0);
            for _ in 0..100 {
                prop_assert!(pd.sample(&mut rng).abs() <= a);
            }
        }
    }
}
