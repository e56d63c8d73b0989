use spikezo::verification::{estimator_variance, log_log_slope, variance_scaling_sweep, VariancePoint, SWEEP_OFFSET};
use spikezo::RngStream;

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

// E ξ^k for ξ ~ N(0, σ²).
fn gaussian_moment(k: u32, sigma2: f64) -> f64 {
    if k % 2 == 1 {
        return 0.0;
    }
    let double_factorial: f64 = (1..k).step_by(2).map(|j| j as f64).product();
    double_factorial * sigma2.powi(k as i32 / 2)
}

// E[(r - ξ)^a ξ^b] by binomial expansion.
fn mixed(a: u32, b: u32, r: f64, sigma2: f64) -> f64 {
    (0..=a)
        .map(|k| binomial(a, k) * r.powi((a - k) as i32) * (-1f64).powi(k as i32) * gaussian_moment(k + b, sigma2))
        .sum()
}

// Var of σ^{-2} (Σ_l q_l) ξ_1 with q_l = (r - ξ_l)², expanding the square of
// the sum term by term over independent coordinates.
fn brute_variance(d: usize, r: f64, sigma2: f64) -> f64 {
    let others = (d - 1) as f64;
    let q1q1 = mixed(4, 2, r, sigma2);
    let cross = 2.0 * others * mixed(2, 2, r, sigma2) * mixed(2, 0, r, sigma2);
    let same = others * mixed(0, 2, r, sigma2) * mixed(4, 0, r, sigma2);
    let distinct = others * (others - 1.0) * mixed(0, 2, r, sigma2) * mixed(2, 0, r, sigma2).powi(2);
    let second = (q1q1 + cross + same + distinct) / (sigma2 * sigma2);
    let mean = (mixed(2, 1, r, sigma2) + others * mixed(0, 1, r, sigma2) * mixed(2, 0, r, sigma2)) / sigma2;
    second - mean * mean
}

fn one_dim_closed_form(r: f64, sigma2: f64) -> f64 {
    r.powi(4) / sigma2 + 14.0 * r * r + 15.0 * sigma2
}

#[test]
fn brute_oracle_reduces_to_one_dim_closed_form() {
    for sigma2 in [0.25, 1.0, 4.0] {
        let b = brute_variance(1, SWEEP_OFFSET, sigma2);
        let c = one_dim_closed_form(SWEEP_OFFSET, sigma2);
        assert!((b - c).abs() < 1e-12 * c, "{b} vs {c}");
    }
}

fn assert_matches(p: VariancePoint, oracle: f64) {
    assert!((p.variance - oracle).abs() <= 4.0 * p.se, "d={}: {} ± {} vs {oracle}", p.d, p.variance, p.se);
}

#[test]
fn one_dim_variance() {
    let p = estimator_variance(1, 1.0, 1_000_000, &mut RngStream::new(1, 0)).unwrap();
    assert_matches(p, one_dim_closed_form(SWEEP_OFFSET, 1.0));
}

#[test]
fn two_dim_variance_against_brute_oracle() {
    let p = estimator_variance(2, 1.0, 1_000_000, &mut RngStream::new(2, 0)).unwrap();
    assert_matches(p, brute_variance(2, SWEEP_OFFSET, 1.0));
}

#[test]
fn variance_under_sigma_scaling() {
    for (i, sigma2) in [0.25, 4.0].into_iter().enumerate() {
        let p = estimator_variance(3, sigma2, 1_000_000, &mut RngStream::new(3, i as u64)).unwrap();
        assert_matches(p, brute_variance(3, SWEEP_OFFSET, sigma2));
    }
}

#[test]
fn sweep_slope_tracks_oracle_slope() {
    let dims = [10, 32, 100, 316, 1000];
    let exact: Vec<_> = dims
        .iter()
        .map(|&d| VariancePoint {
            d,
            variance: brute_variance(d, SWEEP_OFFSET, 1.0),
            se: 0.0,
        })
        .collect();
    let oracle = log_log_slope(&exact).unwrap();
    assert!((1.7..=2.3).contains(&oracle), "{oracle}");
    let sweep = variance_scaling_sweep(&dims[..3], 1.0, 50_000, 4).unwrap();
    for (p, e) in sweep.points.iter().zip(&exact) {
        assert_matches(*p, e.variance);
    }
}
