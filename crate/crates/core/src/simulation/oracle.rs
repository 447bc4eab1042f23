//! Reference solvers that trade speed for obviousness.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::generators::random_walk;
use super::rng::stream;
use super::{Result, SimError};
use crate::diagnostics::{CriticalValues, DeterministicTerms, UnitRootTest};
use crate::quantile::check_loss;

/// Exhaustive quantile regression: every `p`-subset of observations is
/// interpolated exactly and the lowest check loss wins (first subset on ties).
pub fn brute_force_qr(y: &[f64], x: &DMatrix<f64>, tau: f64) -> Result<(DVector<f64>, f64)> {
    let (n, p) = x.shape();
    if n > 9 || p > 3 {
        return Err(SimError::TooLarge { n, p });
    }
    if y.len() != n || p == 0 || n < p || !(tau > 0.0 && tau < 1.0) {
        return Err(SimError::InvalidParams("brute-force QR needs conformable data and tau in (0, 1)".into()));
    }
    let mut best: Option<(DVector<f64>, f64)> = None;
    let mut subset: Vec<usize> = (0..p).collect();
    loop {
        let a = DMatrix::from_fn(p, p, |i, j| x[(subset[i], j)]);
        let b = DVector::from_iterator(p, subset.iter().map(|&i| y[i]));
        let scale = a.amax().max(1e-300);
        let lu = a.clone().lu();
        // skip collinear subsets
        if lu.determinant().abs() > 1e-12 * scale.powi(p as i32) {
            if let Some(beta) = lu.solve(&b) {
                let fitted = x * &beta;
                let obj: f64 = y.iter().zip(fitted.iter()).map(|(yi, fi)| check_loss(yi - fi, tau)).sum();
                if best.as_ref().is_none_or(|(_, f)| obj < *f) {
                    best = Some((beta, obj));
                }
            }
        }
        let mut i = p;
        loop {
            if i == 0 {
                return best.ok_or_else(|| SimError::InvalidParams("every subset is collinear".into()));
            }
            i -= 1;
            if subset[i] < n - (p - i) {
                subset[i] += 1;
                for j in i + 1..p {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Empirical 1%, 5% and 10% quantiles of a unit-root statistic under a
/// driftless random-walk null. Replication `r` uses stream `r` of `seed`.
pub fn mc_critical_values(
    test: &dyn UnitRootTest,
    n: usize,
    terms: DeterministicTerms,
    reps: usize,
    seed: u64,
) -> Result<CriticalValues> {
    if reps < 10_000 {
        return Err(SimError::InvalidParams(format!("need at least 10000 replications, got {reps}")));
    }
    let mut stats: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .filter_map(|r| {
            let y = random_walk(n, &mut stream(seed, r));
            test.run(&y, terms).ok().map(|res| res.statistic)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let q = |p: f64| crate::quantile::quantile_sorted(&stats, p);
    Ok(CriticalValues { one: q(0.01), five: q(0.05), ten: q(0.10) })
}
