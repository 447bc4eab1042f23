//! `regimevol test-oracle`: checks the production estimators against
//! slow reference computations and prints one line per check.

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use regimevol_core::diagnostics::{critical_values, unit_root, DeterministicTerms};
use regimevol_core::markov::{hamilton_filter, MsrData, MsrParams, TransitionCoefs, TransitionMatrix};
use regimevol_core::quantile::{fit_qr, solve, QrOptions};
use regimevol_core::simulation::rng::{stream, SimRng};
use regimevol_core::simulation::{brute_force_qr, mc_critical_values};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    pub instances: usize,
    pub reps: usize,
    pub seed: u64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { instances: 100, reps: 10_000, seed: 1 }
    }
}

fn gaussian(rng: &mut SimRng) -> f64 {
    StandardNormal.sample(rng)
}

fn qr_instances(opts: &OracleOptions) -> Check {
    let taus = [0.1, 0.25, 0.5, 0.75, 0.9];
    let mut worst = 0f64;
    let mut failed = 0;
    for i in 0..opts.instances {
        let mut rng = stream(opts.seed, i as u64);
        let n = 4 + i % 6;
        let p = 1 + (i / 6) % 3;
        let tau = taus[i % taus.len()];
        let x = DMatrix::from_fn(n, p, |_, j| if j == 0 { 1.0 } else { gaussian(&mut rng) });
        let y: Vec<f64> = (0..n).map(|_| gaussian(&mut rng)).collect();
        match (solve(&y, &x, tau), brute_force_qr(&y, &x, tau)) {
            (Ok(sol), Ok((_, best))) => worst = worst.max((sol.objective - best).abs()),
            _ => failed += 1,
        }
    }
    Check {
        name: "quantile regression vs exhaustive search".into(),
        passed: failed == 0 && worst <= 1e-10,
        detail: format!("{} instances, max objective gap {worst:.2e}, {failed} failures", opts.instances),
    }
}

fn median(opts: &OracleOptions) -> Check {
    let mut rng = stream(opts.seed, 1_000_000);
    let y: Vec<f64> = (0..101).map(|_| gaussian(&mut rng)).collect();
    let mut sorted = y.clone();
    sorted.sort_by(f64::total_cmp);
    let fit = fit_qr(&y, &DMatrix::from_element(y.len(), 1, 1.0), 0.5, &QrOptions::default());
    let got = fit.map(|f| f.beta[0]);
    Check {
        name: "intercept-only median".into(),
        passed: got == Ok(sorted[50]),
        detail: format!("fit {:?}, sample median {}", got, sorted[50]),
    }
}

fn hamilton() -> Check {
    let p = [[0.9, 0.1], [0.2, 0.8]];
    let (means, sds, ys) = ([1.0, -0.5], [2.0, 0.7], [0.3, 2.5, -0.4]);
    let pdf = |y: f64, m: f64, s: f64| (-(y - m) * (y - m) / (2.0 * s * s)).exp() / (s * (2.0 * std::f64::consts::PI).sqrt());
    let mut prior = [2.0 / 3.0, 1.0 / 3.0];
    let mut expected = Vec::new();
    let mut loglik = 0.0;
    for y in ys {
        if let Some(f) = expected.last() {
            let f: &[f64; 2] = f;
            prior = [f[0] * p[0][0] + f[1] * p[1][0], f[0] * p[0][1] + f[1] * p[1][1]];
        }
        let joint = [prior[0] * pdf(y, means[0], sds[0]), prior[1] * pdf(y, means[1], sds[1])];
        let total = joint[0] + joint[1];
        loglik += total.ln();
        expected.push([joint[0] / total, joint[1] / total]);
    }
    let matrix = TransitionMatrix::from_rows(&[&p[0], &p[1]]).expect("valid matrix");
    let params = MsrParams {
        beta: vec![vec![means[0]], vec![means[1]]],
        phi: Vec::new(),
        sigma: sds.to_vec(),
        transition: TransitionCoefs::from_matrix(&matrix, 0),
    };
    let data = MsrData::new(ys.to_vec(), DMatrix::from_element(3, 1, 1.0), None, None).expect("valid data");
    let (name, passed, detail) = match hamilton_filter(&params, &data, None) {
        Ok((f, ll)) => {
            let gap = (0..3).flat_map(|t| (0..2).map(move |j| (t, j))).fold((ll - loglik).abs(), |g, (t, j)| {
                g.max((f[(t, j)] - expected[t][j]).abs())
            });
            ("Hamilton filter on the three-period example", gap <= 1e-12, format!("max gap {gap:.2e}"))
        }
        Err(e) => ("Hamilton filter on the three-period example", false, e.to_string()),
    };
    Check { name: name.into(), passed, detail }
}

fn critical(opts: &OracleOptions) -> Vec<Check> {
    let n = 500;
    let table = critical_values(DeterministicTerms::Constant, n);
    unit_root::registry()
        .iter()
        .map(|test| {
            let name = format!("{} critical values by simulation", test.name());
            match mc_critical_values(test.as_ref(), n, DeterministicTerms::Constant, opts.reps, opts.seed) {
                Ok(cv) => {
                    let gap = (cv.one - table.one).abs().max((cv.five - table.five).abs()).max((cv.ten - table.ten).abs());
                    Check {
                        name,
                        passed: gap <= 0.1,
                        detail: format!(
                            "simulated ({:.3}, {:.3}, {:.3}) vs table ({:.3}, {:.3}, {:.3})",
                            cv.one, cv.five, cv.ten, table.one, table.five, table.ten
                        ),
                    }
                }
                Err(e) => Check { name, passed: false, detail: e.to_string() },
            }
        })
        .collect()
}

pub fn run_oracles(opts: &OracleOptions) -> Vec<Check> {
    let mut out = vec![qr_instances(opts), median(opts), hamilton()];
    out.extend(critical(opts));
    out
}
