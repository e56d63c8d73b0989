use spikezo::losses::{LeastSquares, Quartic};
use spikezo::verification::{
    check_bnn_step, check_componentwise, check_stein, check_zero_mean_prev, componentwise_mean,
    gradient_form_mean, gradient_form_quadrature, raw_step_mean, IdentityParams,
};
use spikezo::{LossFunction, RealVector, SupervisedSample};

fn normalizer(a: f64) -> f64 {
    let e2 = (2.0 * a).exp();
    2.0 * ((e2 + 1.0) * a - e2 + 1.0)
}

// Coordinate j of the mean step for ‖y - θ‖² with a zero baseline:
// α (y_j - θ_j) e^{-A} C(A) / A.
fn least_squares_step(y: &[f64], theta: &[f64], a: f64, alpha: f64) -> Vec<f64> {
    y.iter()
        .zip(theta)
        .map(|(y, t)| alpha * (y - t) * (-a).exp() * normalizer(a) / a)
        .collect()
}

// α E[L(θ + U)(e^{-U} - e^{U})], U ~ U[-A, A], by composite Simpson.
fn raw_step_simpson(loss: &dyn LossFunction, theta: f64, a: f64, alpha: f64) -> f64 {
    let m = 20_000;
    let h = 2.0 * a / m as f64;
    let s = SupervisedSample::empty(0);
    let f = |u: f64| loss.value(&[theta + u], &s) * ((-u).exp() - u.exp());
    let mut acc = f(-a) + f(a);
    for i in 1..m {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(-a + i as f64 * h);
    }
    alpha * acc * h / 3.0 / (2.0 * a)
}

fn ls(y: &[f64]) -> LeastSquares {
    LeastSquares::new(RealVector::new(y.to_vec()).unwrap())
}

#[test]
fn four_over_e_at_unit_scale() {
    let step = gradient_form_quadrature(&ls(&[1.0]), &[0.0], 1.0, 1.0).unwrap();
    assert!((step[0] - 4.0 / std::f64::consts::E).abs() < 1e-9);
}

#[test]
fn quadrature_matches_least_squares_closed_form() {
    let y = [1.0, -1.0];
    let theta = [0.0, 0.5];
    for a in [0.5, 1.0, 2.0] {
        let got = gradient_form_quadrature(&ls(&y), &theta, a, 0.3).unwrap();
        let want = least_squares_step(&y, &theta, a, 0.3);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() <= 1e-8 * w.abs(), "A={a}: {g} vs {w}");
        }
    }
}

#[test]
fn quartic_gradient_form_matches_raw_integral() {
    let loss = Quartic::new(RealVector::new(vec![0.0]).unwrap());
    for (theta, a) in [(1.0, 1.0), (-0.4, 0.5), (0.3, 2.0)] {
        let got = gradient_form_quadrature(&loss, &[theta], a, 1.0).unwrap()[0];
        let want = raw_step_simpson(&loss, theta, a, 1.0);
        assert!((got - want).abs() <= 1e-8 * (1.0 + want.abs()), "θ={theta}, A={a}: {got} vs {want}");
    }
}

#[test]
fn monte_carlo_routes_match_closed_form() {
    let y = [1.0, -1.0];
    let theta = [0.0, 0.5];
    let params = IdentityParams {
        half_interval: 0.5,
        alpha: 1.0,
        n: 200_000,
        seed: 11,
    };
    let want = least_squares_step(&y, &theta, 0.5, 1.0);
    let routes = [
        raw_step_mean(&ls(&y), &theta, &params, 0).unwrap(),
        gradient_form_mean(&ls(&y), &theta, &params, 1).unwrap(),
        componentwise_mean(&ls(&y), &theta, &params).unwrap(),
    ];
    for est in &routes {
        for j in 0..2 {
            assert!((est.mean[j] - want[j]).abs() <= 4.0 * est.se[j], "{est:?} vs {want:?}");
        }
    }
}

#[test]
fn componentwise_and_bnn_step_checks_pass() {
    let params = IdentityParams {
        half_interval: 1.0,
        alpha: 1.0,
        n: 200_000,
        seed: 3,
    };
    assert!(check_componentwise(&ls(&[0.8, -1.3, 0.4]), &[-0.2, 0.5, 0.9], &params, 3.0).unwrap().pass);
    assert!(check_bnn_step(&ls(&[1.0]), &[0.0], &params, 0.02).unwrap().pass);
}

#[test]
fn previous_loss_baseline_has_zero_mean() {
    let quartic = Quartic::new(RealVector::new(vec![0.5, -0.5]).unwrap());
    let r = check_zero_mean_prev(&ls(&[3.0, 1.0]), &[0.0, 0.0], 1.0, 200_000, 8).unwrap();
    assert!(r.pass, "{r:?}");
    let r = check_zero_mean_prev(&quartic, &[1.0, 0.2], 1.0, 200_000, 9).unwrap();
    assert!(r.pass, "{r:?}");
    assert!(r.oracle.iter().all(|&o| o == 0.0));
}

#[test]
fn stein_identity_for_least_squares() {
    let y = RealVector::new(vec![1.0, -0.5, 2.0]).unwrap();
    let theta = RealVector::new(vec![0.2, 0.4, -0.6]).unwrap();
    let r = check_stein(&y, &theta, 0.5, 400_000, 1).unwrap();
    for (j, o) in r.oracle.iter().enumerate() {
        let want = -2.0 * 0.5 * (y.as_slice()[j] - theta.as_slice()[j]);
        assert!((o - want).abs() < 1e-15);
    }
    assert!(r.pass, "{r:?}");
}
