use approx::assert_relative_eq;
use proptest::prelude::*;
use regimevol_core::garch_midas::{
    beta_weights, extract_volatilities, fit, fit_gjr, fit_restricted, variance_paths, GarchMidasError, GarchMidasSpec,
    LongRunForm,
};
use regimevol_core::optim::Bfgs;
use regimevol_core::series::ReturnSeries;
use regimevol_core::simulation::{garch_midas_truth, simulate_garch_midas, weekday_calendar};

#[test]
fn recovers_simulated_parameters() {
    let truth = garch_midas_truth();
    let sim = simulate_garch_midas(&truth, 12, LongRunForm::Log, 4000, 101).unwrap();
    let t0 = std::time::Instant::now();
    let f = fit(&sim.returns, &sim.x1, &sim.x2, &GarchMidasSpec::default()).unwrap();
    eprintln!("fit took {:?}\n{}", t0.elapsed(), f.report());
    assert!(f.converged);
    let values = [
        ("mu", truth.mu),
        ("alpha", truth.alpha),
        ("gamma", truth.gamma),
        ("beta", truth.beta),
        ("m", truth.m),
        ("theta1", truth.theta1),
        ("theta2", truth.theta2),
    ];
    for (name, v) in values {
        let (est, se) = f.estimate(name).unwrap();
        assert!(se.is_finite() && se > 0.0, "{name}: se {se}");
        assert!((est - v).abs() < 4.0 * se, "{name}: {est} +- {se} vs {v}");
    }
    // the fitted paths are the model evaluated at the estimates
    let paths = variance_paths(&f.params, &f.sample, LongRunForm::Log).unwrap();
    assert_eq!(paths.h, f.stv.values());
    assert_eq!(paths.tau, f.ltv.values());
    assert_eq!(f.total_variance(), paths.total);
}

#[test]
fn restricted_fit_equals_plain_gjr() {
    let mut truth = garch_midas_truth();
    truth.theta1 = 0.0;
    truth.theta2 = 0.0;
    let sim = simulate_garch_midas(&truth, 12, LongRunForm::Log, 2500, 7).unwrap();
    let spec = GarchMidasSpec::default();
    let r = fit_restricted(&sim.returns, &spec).unwrap();
    let g = fit_gjr(&sim.returns, &Bfgs::default()).unwrap();
    let p = r.params;
    assert!((p.mu - g.params.mu).abs() < 1e-4);
    assert!((p.alpha - g.params.alpha).abs() < 1e-4);
    assert!((p.gamma - g.params.gamma).abs() < 1e-4);
    assert!((p.beta - g.params.beta).abs() < 1e-4);
    assert!((p.m.exp() - g.params.unconditional_variance()).abs() < 1e-4 * g.params.unconditional_variance().max(1.0));
    assert!((r.loglik - g.loglik).abs() < 1e-6 * g.loglik.abs());
}

#[test]
fn constant_returns_are_rejected() {
    let dates = weekday_calendar(600);
    let returns = ReturnSeries::new(dates, vec![0.1; 600]).unwrap();
    let err = fit_restricted(&returns, &GarchMidasSpec::default()).unwrap_err();
    assert!(matches!(err, GarchMidasError::InsufficientData(_)));
}

#[test]
fn too_short_history_is_rejected() {
    let sim = simulate_garch_midas(&garch_midas_truth(), 12, LongRunForm::Log, 200, 3).unwrap();
    let err = fit(&sim.returns, &sim.x1, &sim.x2, &GarchMidasSpec::default()).unwrap_err();
    assert!(matches!(err, GarchMidasError::InsufficientData(_)), "{err:?}");
}

#[test]
fn unconverged_fits_are_flagged() {
    let sim = simulate_garch_midas(&garch_midas_truth(), 12, LongRunForm::Log, 1500, 5).unwrap();
    let spec = GarchMidasSpec { optimizer: Bfgs { max_iter: 2, ..Bfgs::default() }, n_starts: 1, ..Default::default() };
    let f = fit(&sim.returns, &sim.x1, &sim.x2, &spec).unwrap();
    assert!(!f.converged);
    assert_eq!(f.require_converged().unwrap_err(), GarchMidasError::NoConvergence);
    assert_eq!(extract_volatilities(&f, false).unwrap_err(), GarchMidasError::NotFitted);
    assert!(extract_volatilities(&f, true).is_ok());
}

#[test]
fn simulation_is_deterministic_and_standardises() {
    let truth = garch_midas_truth();
    let a = simulate_garch_midas(&truth, 12, LongRunForm::Log, 3000, 9).unwrap();
    let b = simulate_garch_midas(&truth, 12, LongRunForm::Log, 3000, 9).unwrap();
    assert_eq!(a.returns, b.returns);
    let big = simulate_garch_midas(&truth, 12, LongRunForm::Log, 100_000, 10).unwrap();
    let z: Vec<f64> =
        big.returns.returns.iter().zip(&big.total_variance).map(|(r, v)| (r - truth.mu) / v.sqrt()).collect();
    let var = z.iter().map(|v| v * v).sum::<f64>() / z.len() as f64;
    assert!((var - 1.0).abs() < 0.05, "{var}");
}

#[test]
fn null_long_run_scales_short_run() {
    let mut p = garch_midas_truth();
    p.theta1 = 0.0;
    p.theta2 = 0.0;
    let sim = simulate_garch_midas(&p, 12, LongRunForm::Log, 500, 4).unwrap();
    for (v, h) in sim.total_variance.iter().zip(&sim.stv) {
        assert_relative_eq!(*v, h * p.m.exp(), max_relative = 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weights_sum_to_one(k in 1usize..60, w1 in 1.0f64..20.0, w2 in 1.0f64..50.0) {
        let w = beta_weights(k, w1, w2).unwrap();
        prop_assert!((w.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(w.weights.iter().all(|v| *v >= 0.0));
    }
}
