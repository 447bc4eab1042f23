use nalgebra::DMatrix;
use proptest::prelude::*;
use rand_distr::{Distribution, StandardNormal};
use regimevol_core::linalg::ols;
use regimevol_core::markov::{
    expected_durations, fit_msr, hamilton_filter, smoothed_probabilities, transition_logit, MarkovError, MsrData,
    MsrParams, MsrSpec, TransitionCoefs, TransitionMatrix,
};
use regimevol_core::simulation::rng::stream;
use regimevol_core::simulation::{msr_truth, simulate_msr};

fn normal_pdf(y: f64, mean: f64, sd: f64) -> f64 {
    (-(y - mean).powi(2) / (2.0 * sd * sd)).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
}

fn toy() -> (MsrParams, MsrData) {
    let p = TransitionMatrix::from_rows(&[&[0.9, 0.1], &[0.2, 0.8]]).unwrap();
    let params = MsrParams {
        beta: vec![vec![1.0], vec![-0.5]],
        phi: vec![],
        sigma: vec![2.0, 0.7],
        transition: TransitionCoefs::from_matrix(&p, 0),
    };
    let data = MsrData::new(vec![0.3, 2.5, -0.4], DMatrix::from_element(3, 1, 1.0), None, None).unwrap();
    (params, data)
}

#[test]
fn three_period_recursion_by_hand() {
    let (params, data) = toy();
    let p = [[0.9, 0.1], [0.2, 0.8]];
    let means = [1.0, -0.5];
    let sds = [2.0, 0.7];
    // ergodic distribution of p: pi_1 = 0.2 / (0.1 + 0.2)
    let mut prior = [2.0 / 3.0, 1.0 / 3.0];
    let mut filtered = Vec::new();
    let mut predicted = Vec::new();
    let mut loglik = 0.0;
    for (t, y) in data.y.iter().enumerate() {
        if t > 0 {
            let f: [f64; 2] = filtered[t - 1];
            prior = [f[0] * p[0][0] + f[1] * p[1][0], f[0] * p[0][1] + f[1] * p[1][1]];
        }
        predicted.push(prior);
        let joint = [prior[0] * normal_pdf(*y, means[0], sds[0]), prior[1] * normal_pdf(*y, means[1], sds[1])];
        let total = joint[0] + joint[1];
        loglik += total.ln();
        filtered.push([joint[0] / total, joint[1] / total]);
    }
    let (f, ll) = hamilton_filter(&params, &data, None).unwrap();
    assert!((ll - loglik).abs() < 1e-12);
    for t in 0..3 {
        for j in 0..2 {
            assert!((f[(t, j)] - filtered[t][j]).abs() < 1e-12);
        }
    }
    // backward pass
    let mut smoothed = vec![[0.0; 2]; 3];
    smoothed[2] = filtered[2];
    for t in (0..2).rev() {
        for i in 0..2 {
            let s: f64 = (0..2).map(|j| p[i][j] * smoothed[t + 1][j] / predicted[t + 1][j]).sum();
            smoothed[t][i] = filtered[t][i] * s;
        }
    }
    let s = smoothed_probabilities(&params, &data, None).unwrap();
    for t in 0..3 {
        for j in 0..2 {
            assert!((s[(t, j)] - smoothed[t][j]).abs() < 1e-12);
        }
    }
}

#[test]
fn identical_regimes_reproduce_the_prior() {
    let p = TransitionMatrix::from_rows(&[&[0.7, 0.3], &[0.4, 0.6]]).unwrap();
    let erg = p.ergodic();
    let params = MsrParams {
        beta: vec![vec![0.5, 1.0]; 2],
        phi: vec![],
        sigma: vec![1.3; 2],
        transition: TransitionCoefs::from_matrix(&p, 0),
    };
    let mut rng = stream(3, 0);
    let n = 200;
    let x = DMatrix::from_fn(n, 2, |_, j| if j == 0 { 1.0 } else { StandardNormal.sample(&mut rng) });
    let y: Vec<f64> = (0..n).map(|i| 0.5 + x[(i, 1)] + 1.3 * Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect();
    let data = MsrData::new(y.clone(), x.clone(), None, None).unwrap();
    let (f, ll) = hamilton_filter(&params, &data, None).unwrap();
    let s = smoothed_probabilities(&params, &data, None).unwrap();
    for t in 0..n {
        for j in 0..2 {
            assert!((f[(t, j)] - erg[j]).abs() < 1e-10);
            assert!((s[(t, j)] - erg[j]).abs() < 1e-10);
        }
    }
    let single: f64 = (0..n).map(|i| normal_pdf(y[i], 0.5 + x[(i, 1)], 1.3).ln()).sum();
    assert!((ll - single).abs() < 1e-8);
}

#[test]
fn absorbing_chain_stays_put() {
    let p = TransitionMatrix::from_rows(&[&[1.0, 0.0], &[0.0, 1.0]]).unwrap();
    let params = MsrParams {
        beta: vec![vec![0.0], vec![3.0]],
        phi: vec![],
        sigma: vec![1.0, 1.0],
        transition: TransitionCoefs::from_matrix(&p, 0),
    };
    let y = vec![3.0, 2.9, 3.2, -0.1, 0.0, 5.0];
    let data = MsrData::new(y, DMatrix::from_element(6, 1, 1.0), None, None).unwrap();
    let (f, _) = hamilton_filter(&params, &data, Some(&[1.0, 0.0])).unwrap();
    for t in 0..6 {
        assert_eq!(f[(t, 0)], 1.0);
    }
    assert_eq!(expected_durations(&p), vec![f64::INFINITY, f64::INFINITY]);
}

#[test]
fn short_samples_are_refused() {
    // 2 regimes x 4 coefficients + 2 sigmas + 2 transition logits = 12 parameters
    let mut rng = stream(1, 0);
    let x = DMatrix::from_fn(20, 4, |_, j| if j == 0 { 1.0 } else { StandardNormal.sample(&mut rng) });
    let y: Vec<f64> = (0..20).map(|_| StandardNormal.sample(&mut rng)).collect();
    let data = MsrData::new(y, x, None, None).unwrap();
    let spec = MsrSpec { switching: vec!["const".into(), "a".into(), "b".into(), "c".into()], ..Default::default() };
    assert!(matches!(fit_msr(&spec, &data), Err(MarkovError::InsufficientData(_))));
}

fn simulated(seed: u64, t_len: usize) -> (MsrData, Vec<usize>) {
    let sim = simulate_msr(&msr_truth(), t_len, seed).unwrap();
    (sim.data, sim.regimes)
}

fn two_regressor_spec() -> MsrSpec {
    MsrSpec { switching: vec!["const".into(), "x".into()], ..Default::default() }
}

#[test]
fn recovers_the_simulated_truth() {
    let (data, _) = simulated(11, 2000);
    let t0 = std::time::Instant::now();
    let fit = fit_msr(&two_regressor_spec(), &data).unwrap();
    eprintln!("MSR fit took {:?}\n{}", t0.elapsed(), fit.report());
    assert!(fit.converged);
    let truth = [
        ("beta_1[const]", 1.0),
        ("beta_1[x]", 0.5),
        ("beta_2[const]", -1.0),
        ("beta_2[x]", 0.2),
        ("sigma_1", 2.0),
        ("sigma_2", 0.5),
        ("p11", 0.95),
        ("p22", 0.90),
    ];
    for (name, v) in truth {
        let (est, se) = fit.estimate(name).unwrap();
        assert!((est - v).abs() < 4.0 * se, "{name}: {est} +- {se} vs {v}");
    }
    // every start is improved upon
    assert!(fit.start_logliks.iter().all(|l| fit.loglik >= *l - 1e-9));
    for t in 0..fit.nobs {
        assert!((fit.filtered.row(t).sum() - 1.0).abs() < 1e-10);
        assert!((fit.smoothed.row(t).sum() - 1.0).abs() < 1e-10);
    }
    assert!(fit.params.sigma[0] >= fit.params.sigma[1]);
}

#[test]
fn well_separated_regimes_are_tracked() {
    // sigma ratio 10; persistent chain (0.98 on the diagonal) so each spell is long enough to identify
    let mut truth = msr_truth();
    truth.sigma = vec![5.0, 0.5];
    let p = TransitionMatrix::from_rows(&[&[0.98, 0.02], &[0.02, 0.98]]).unwrap();
    truth.transition = TransitionCoefs::from_matrix(&p, 0);
    let sim = simulate_msr(&truth, 1500, 21).unwrap();
    let s = smoothed_probabilities(&truth, &sim.data, None).unwrap();
    let hits = (0..1500).filter(|&t| (s[(t, sim.regimes[t])] - 1.0).abs() <= 0.05).count();
    assert!(hits as f64 >= 0.95 * 1500.0, "{hits}");
}

#[test]
fn relabeling_is_a_symmetry() {
    let (data, _) = simulated(12, 400);
    let p = msr_truth();
    let swapped = p.permuted(&[1, 0]);
    let (_, a) = hamilton_filter(&p, &data, None).unwrap();
    let (_, b) = hamilton_filter(&swapped, &data, None).unwrap();
    assert!((a - b).abs() < 1e-9);
    let back = swapped.relabeled();
    assert_eq!(back.sigma, p.sigma);
    assert_eq!(back.beta, p.beta);
    let (pa, pb) = (p.transition_at(&[]), back.transition_at(&[]));
    assert!((pa.matrix() - pb.matrix()).amax() < 1e-12);
}

#[test]
fn shifting_the_response_shifts_the_intercepts() {
    let (data, _) = simulated(13, 800);
    let c = 3.0;
    let shifted = MsrData::new(data.y.iter().map(|v| v + c).collect(), data.x.clone(), None, None).unwrap();
    let spec = two_regressor_spec();
    let a = fit_msr(&spec, &data).unwrap();
    let b = fit_msr(&spec, &shifted).unwrap();
    assert!((a.loglik - b.loglik).abs() < 1e-4, "{} vs {}", a.loglik, b.loglik);
    for r in 0..2 {
        assert!((b.params.beta[r][0] - a.params.beta[r][0] - c).abs() < 1e-4);
        assert!((b.params.beta[r][1] - a.params.beta[r][1]).abs() < 1e-4);
    }
}

#[test]
fn one_regime_data_fits_at_least_as_well_as_ols() {
    let mut rng = stream(14, 0);
    let n = 600;
    let x = DMatrix::from_fn(n, 2, |_, j| if j == 0 { 1.0 } else { StandardNormal.sample(&mut rng) });
    let y: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * x[(i, 1)] + Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect();
    let o = ols(&y, &x).unwrap();
    let s2 = o.residuals.iter().map(|r| r * r).sum::<f64>() / n as f64;
    let ols_ll = -0.5 * n as f64 * ((2.0 * std::f64::consts::PI * s2).ln() + 1.0);
    let fit = fit_msr(&two_regressor_spec(), &MsrData::new(y, x, None, None).unwrap()).unwrap();
    assert!(fit.loglik >= ols_ll - 1e-4, "{} vs {ols_ll}", fit.loglik);
}

#[test]
fn logit_examples() {
    let zero = TransitionCoefs::zeros(3, 1);
    let p = transition_logit(&[0.7], &zero);
    assert!((p.matrix() - DMatrix::from_element(3, 3, 1.0 / 3.0)).amax() < 1e-15);
    let mut c = TransitionCoefs::zeros(2, 0);
    c.coef_mut(0, 0)[0] = 9f64.ln();
    assert!((transition_logit(&[], &c).get(0, 0) - 0.9).abs() < 1e-15);
}

#[test]
fn durations_follow_the_diagonal() {
    let p = TransitionMatrix::from_rows(&[&[0.5, 0.5], &[0.05, 0.95]]).unwrap();
    let d = expected_durations(&p);
    assert!((d[0] - 2.0).abs() < 1e-12 && (d[1] - 20.0).abs() < 1e-9);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn logit_rows_sum_to_one(values in prop::collection::vec(-30.0f64..30.0, 12), e in prop::collection::vec(-3.0f64..3.0, 1)) {
        let c = TransitionCoefs::from_values(3, 1, values).unwrap();
        let p = transition_logit(&e, &c);
        for i in 0..3 {
            prop_assert!((p.matrix().row(i).sum() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn filter_rows_sum_to_one(seed in 0u64..500) {
        let (data, _) = simulated(seed, 60);
        let (f, ll) = hamilton_filter(&msr_truth(), &data, None).unwrap();
        prop_assert!(ll.is_finite());
        for t in 0..60 {
            prop_assert!((f.row(t).sum() - 1.0).abs() < 1e-10);
        }
    }
}
