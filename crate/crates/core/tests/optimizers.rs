use spikezo::losses::LeastSquares;
use spikezo::optimizers::{
    bnn_multiplicative_step, bnn_zo_step, run_optimizer, AnticipatedLossStrategy, GradientSource, Initialization,
    Method, MultiplicativeState, OptimizerState, PositivityPolicy, Problem, RunConfig, WeightSpaceLoss, WeightVector,
};
use spikezo::perturbation::NoiseConfig;
use spikezo::{LearningRateSchedule, RealVector, RngStream, SupervisedSample};

#[test]
fn gradient_descent_contracts_geometrically() {
    let target = RealVector::new(vec![1.0, -2.0, 0.5]).unwrap();
    let theta0 = RealVector::new(vec![0.3, 0.7, -1.1]).unwrap();
    let problem = Problem::LeastSquares { target };
    let mut cfg = RunConfig::new(LearningRateSchedule::constant(0.25).unwrap(), 50, 0);
    cfg.init = Initialization::Given { theta: theta0.clone() };
    let method = Method::Gd {
        gradient: GradientSource::Analytic,
    };
    let trace = run_optimizer(&method, &problem, &cfg).unwrap();
    let l0 = trace.initial_loss[0];
    // θ - y halves every step, so the loss quarters.
    for row in &trace.rows {
        let want = l0 * 0.25f64.powi(row.iter as i32);
        assert!((row.loss - want).abs() <= 1e-12 * l0, "iter {}: {} vs {want}", row.iter, row.loss);
    }
    assert!(trace.mean_loss(50).unwrap() < 1e-10);
}

// |log(1 + s) - s| <= s² / (2(1 - |s|)) for |s| < 1.
fn taylor_bound(s: f64) -> f64 {
    s * s / (2.0 * (1.0 - s.abs()))
}

#[test]
fn multiplicative_step_is_additive_step_in_log_coordinates() {
    let mut gen = RngStream::new(99, 0);
    let sample = SupervisedSample::empty(0);
    let mut max_gap: f64 = 0.0;
    for i in 0..1000 {
        let d = 1 + i % 4;
        let a = 0.1 + 0.9 * gen.uniform01();
        let alpha = 1e-4 + 5e-3 * gen.uniform01();
        let theta: Vec<f64> = (0..d).map(|_| gen.uniform_symmetric(1.0)).collect();
        let y: Vec<f64> = (0..d).map(|_| gen.uniform_symmetric(1.0)).collect();
        let u: Vec<f64> = (0..d).map(|_| gen.uniform_symmetric(a)).collect();
        let loss = LeastSquares::new(RealVector::new(y).unwrap());
        let schedule = LearningRateSchedule::constant(alpha).unwrap();
        let noise = NoiseConfig::new(a, d).unwrap();
        let strategy = AnticipatedLossStrategy::zero();

        let theta0 = RealVector::new(theta).unwrap();
        let mut additive = OptimizerState::new(theta0.clone(), 4, RngStream::new(0, 0));
        let out = bnn_zo_step(&mut additive, &loss, &sample, &schedule, &noise, &strategy, Some(&u)).unwrap();
        let mut multiplicative =
            MultiplicativeState::new(WeightVector::from_log(&theta0).unwrap(), 4, RngStream::new(0, 0));
        bnn_multiplicative_step(
            &mut multiplicative,
            &WeightSpaceLoss(loss),
            &sample,
            &schedule,
            &noise,
            &strategy,
            PositivityPolicy::Abort,
            Some(&u),
        )
        .unwrap();

        let delta = out.loss_delta.unwrap();
        let log_w = multiplicative.weights().log();
        for (j, ((u, lw), t)) in u.iter().zip(log_w.as_slice()).zip(additive.theta().as_slice()).enumerate() {
            let s = alpha * delta * ((-u).exp() - u.exp());
            assert!(s.abs() < 1.0);
            let gap = (lw - t).abs();
            assert!(gap <= taylor_bound(s) + 1e-12, "instance {i}, coordinate {j}: {gap} > {}", taylor_bound(s));
            max_gap = max_gap.max(gap);
        }
    }
    assert!(max_gap > 0.0);
}

#[test]
fn parallel_replicates_match_sequential() {
    let problem = Problem::LeastSquares {
        target: RealVector::filled(5, 1.0).unwrap(),
    };
    let methods = [
        Method::Bnn {
            half_interval: 1.0,
            strategy: AnticipatedLossStrategy::previous(),
        },
        Method::OnePoint {
            sigma2: 0.1,
            beta: None,
        },
    ];
    for method in methods {
        let mut cfg = RunConfig::new(LearningRateSchedule::constant(0.005).unwrap(), 100, 7);
        cfg.replicates = 8;
        let sequential = run_optimizer(&method, &problem, &cfg).unwrap();
        cfg.parallel = 4;
        let parallel = run_optimizer(&method, &problem, &cfg).unwrap();
        assert_eq!(sequential, parallel);
    }
}

#[test]
fn averaged_plasticity_run_reduces_loss() {
    let problem = Problem::LeastSquares {
        target: RealVector::filled(10, 3.0).unwrap(),
    };
    let method = Method::Bnn {
        half_interval: 1.0,
        strategy: AnticipatedLossStrategy::previous(),
    };
    let mut cfg = RunConfig::new(LearningRateSchedule::constant(0.01).unwrap(), 500, 2026);
    cfg.replicates = 64;
    let trace = run_optimizer(&method, &problem, &cfg).unwrap();
    let ratio = trace.mean_loss(500).unwrap() / trace.mean_loss(0).unwrap();
    assert!(ratio < 0.2, "{ratio}");
}
