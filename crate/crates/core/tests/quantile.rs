use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use regimevol_core::quantile::{check_loss, fit_qr, quantile_process, solve, QrOptions};
use regimevol_core::simulation::rng::stream;
use regimevol_core::simulation::{brute_force_qr, simulate_location_shift};

fn random_instance(seed: u64) -> (Vec<f64>, DMatrix<f64>, f64) {
    let mut rng = stream(seed, 0);
    let n = rng.random_range(4..=9usize);
    let p = rng.random_range(1..=3usize).min(n - 1);
    let tau = [0.1, 0.25, 0.5, 0.75, 0.9][rng.random_range(0..5usize)];
    let x = DMatrix::from_fn(n, p, |_, j| if j == 0 { 1.0 } else { StandardNormal.sample(&mut rng) });
    let y = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    (y, x, tau)
}

#[test]
fn matches_exhaustive_vertex_search() {
    for seed in 0..300 {
        let (y, x, tau) = random_instance(seed);
        let sol = solve(&y, &x, tau).unwrap();
        let (_, best) = brute_force_qr(&y, &x, tau).unwrap();
        assert!((sol.objective - best).abs() < 1e-10, "seed {seed}: {} vs {best}", sol.objective);
    }
}

#[test]
fn seven_point_instances() {
    for (seed, tau) in [(11u64, 0.25), (12, 0.5), (13, 0.75)] {
        let mut rng = stream(seed, 0);
        let x = DMatrix::from_fn(7, 2, |_, j| if j == 0 { 1.0 } else { StandardNormal.sample(&mut rng) });
        let y: Vec<f64> = (0..7).map(|_| StandardNormal.sample(&mut rng)).collect();
        let sol = solve(&y, &x, tau).unwrap();
        let (_, best) = brute_force_qr(&y, &x, tau).unwrap();
        assert!((sol.objective - best).abs() < 1e-10);
    }
}

#[test]
fn tied_responses_reach_the_optimum() {
    // many zero residuals at once: integer data on a small grid
    for seed in 0..100 {
        let mut rng = stream(seed, 7);
        let n = 9;
        let x = DMatrix::from_fn(n, 2, |_, j| if j == 0 { 1.0 } else { rng.random_range(0..3) as f64 });
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(0..3) as f64).collect();
        let tau = [0.25, 0.5, 0.75][seed as usize % 3];
        match brute_force_qr(&y, &x, tau) {
            Ok((_, best)) => {
                let sol = solve(&y, &x, tau).unwrap();
                assert!((sol.objective - best).abs() < 1e-10, "seed {seed}");
            }
            Err(_) => assert!(solve(&y, &x, tau).is_err()),
        }
    }
}

#[test]
fn brute_force_guard() {
    let x = DMatrix::from_element(10, 1, 1.0);
    assert!(brute_force_qr(&[0.0; 10], &x, 0.5).is_err());
}

#[test]
fn optimality_sign_counts() {
    let (y, x) = simulate_location_shift(500, 1.0, 2.0, 9);
    for tau in [0.1, 0.3, 0.5, 0.9] {
        let fit = fit_qr(&y, &x, tau, &QrOptions::default()).unwrap();
        let pos = fit.residuals.iter().filter(|r| **r > 0.0).count() as f64;
        let neg = fit.residuals.iter().filter(|r| **r < 0.0).count() as f64;
        assert!(pos <= 500.0 * (1.0 - tau) + 1e-9 && neg <= 500.0 * tau + 1e-9, "tau {tau}: {pos} / {neg}");
    }
}

#[test]
fn median_standard_error_matches_asymptotics() {
    let mut rng = stream(42, 0);
    let n = 5000;
    let y: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let x = DMatrix::from_element(n, 1, 1.0);
    let fit = fit_qr(&y, &x, 0.5, &QrOptions::default()).unwrap();
    let se = fit.std_errors().unwrap()[0];
    let target = (std::f64::consts::PI / 2.0).sqrt() / (n as f64).sqrt();
    assert!((se / target - 1.0).abs() < 0.15, "{se} vs {target}");
}

#[test]
fn scaling_x_scales_slope_errors() {
    let (y, x) = simulate_location_shift(800, 0.0, 1.0, 3);
    let mut x2 = x.clone();
    x2.column_mut(1).scale_mut(4.0);
    let a = fit_qr(&y, &x, 0.5, &QrOptions::default()).unwrap();
    let b = fit_qr(&y, &x2, 0.5, &QrOptions::default()).unwrap();
    let (sa, sb) = (a.std_errors().unwrap()[1], b.std_errors().unwrap()[1]);
    assert!((sa / sb - 4.0).abs() < 1e-6, "{sa} {sb}");
}

#[test]
fn pseudo_r2_near_zero_under_independence() {
    let mut rng = stream(77, 0);
    let n = 5000;
    let x = DMatrix::from_fn(n, 2, |_, j| if j == 0 { 1.0 } else { StandardNormal.sample(&mut rng) });
    let y: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let fit = fit_qr(&y, &x, 0.5, &QrOptions::default()).unwrap();
    assert!(fit.pseudo_r2.unwrap() < 0.01);
}

#[test]
fn singleton_process_equals_single_fit() {
    let (y, x) = simulate_location_shift(300, 0.5, 1.0, 5);
    let names = vec!["const".to_string(), "x".to_string()];
    let proc_ = quantile_process(&y, &x, &names, &[0.5], &QrOptions::default()).unwrap();
    let single = fit_qr(&y, &x, 0.5, &QrOptions::default()).unwrap();
    assert_eq!(proc_.fits[0].as_ref().unwrap().beta, single.beta);
    assert!(quantile_process(&y, &x, &names, &[0.6, 0.5], &QrOptions::default()).is_err());
}

#[test]
fn adding_regressors_never_raises_the_objective() {
    let mut rng = stream(5, 0);
    let n = 200;
    let x = DMatrix::from_fn(n, 3, |_, j| if j == 0 { 1.0 } else { StandardNormal.sample(&mut rng) });
    let y: Vec<f64> = (0..n).map(|i| x[(i, 1)] + Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect();
    let mut last = f64::INFINITY;
    for p in 1..=3 {
        let sub = x.columns(0, p).into_owned();
        let f = solve(&y, &sub, 0.3).unwrap().objective;
        assert!(f <= last + 1e-9);
        last = f;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn check_loss_is_nonnegative(w in -1e6f64..1e6, tau in 0.001f64..0.999) {
        prop_assert!(check_loss(w, tau) >= 0.0);
    }

    #[test]
    fn equivariance(seed in 0u64..1000, c in 0.1f64..10.0, d0 in -5.0f64..5.0, d1 in -5.0f64..5.0) {
        let (y, x) = simulate_location_shift(60, 0.0, 1.0, seed);
        let base = solve(&y, &x, 0.4).unwrap();
        let scaled: Vec<f64> = y.iter().map(|v| c * v).collect();
        let s = solve(&scaled, &x, 0.4).unwrap();
        prop_assert!((s.objective - c * base.objective).abs() < 1e-8 * (1.0 + base.objective * c));
        prop_assert!((&s.beta - &base.beta * c).amax() < 1e-8 * (1.0 + c));
        let shifted: Vec<f64> = (0..y.len()).map(|i| y[i] + d0 + d1 * x[(i, 1)]).collect();
        let t = solve(&shifted, &x, 0.4).unwrap();
        prop_assert!((t.objective - base.objective).abs() < 1e-8 * (1.0 + base.objective));
        prop_assert!((t.beta[0] - base.beta[0] - d0).abs() < 1e-8 && (t.beta[1] - base.beta[1] - d1).abs() < 1e-8);
    }
}
