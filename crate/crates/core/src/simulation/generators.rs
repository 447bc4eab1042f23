//! Forward simulation of every model with known ground truth.

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::rng::{stream, SimRng};
use super::{Result, SimError};
use crate::garch_midas::{long_run_component, GarchMidasParams, LongRunForm, MidasData};
use crate::markov::{MsrData, MsrParams};
use crate::series::{month_from_key, month_key, ReturnSeries, TimeSeries};

/// Persistence of simulated monthly covariates.
pub const COVARIATE_AR: f64 = 0.9;

fn normal(rng: &mut SimRng) -> f64 {
    StandardNormal.sample(rng)
}

/// `n` consecutive weekdays starting at 2000-01-03.
pub fn weekday_calendar(n: usize) -> Vec<NaiveDate> {
    let mut d = NaiveDate::from_ymd_opt(2000, 1, 3).expect("valid date");
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d += Duration::days(1);
    }
    out
}

/// Stationary Gaussian AR(1) with unit-variance innovations.
pub fn ar1(n: usize, phi: f64, rng: &mut SimRng) -> Vec<f64> {
    let mut x = normal(rng) / (1.0 - phi * phi).sqrt();
    (0..n)
        .map(|_| {
            let v = x;
            x = phi * x + normal(rng);
            v
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct GarchMidasSim {
    pub returns: ReturnSeries,
    pub x1: TimeSeries,
    pub x2: TimeSeries,
    /// True short-run component per day.
    pub stv: Vec<f64>,
    /// True long-run component per month of the return sample.
    pub ltv: Vec<f64>,
    pub total_variance: Vec<f64>,
    pub data: MidasData,
}

/// Simulates `n_days` returns with covariates carrying `k` months of
/// pre-sample history.
pub fn simulate_garch_midas(
    params: &GarchMidasParams,
    k: usize,
    form: LongRunForm,
    n_days: usize,
    seed: u64,
) -> Result<GarchMidasSim> {
    if !params.is_admissible() || k == 0 || n_days < 2 {
        return Err(SimError::InvalidParams("GARCH-MIDAS parameters are not admissible".into()));
    }
    let mut rng = stream(seed, 0);
    let dates = weekday_calendar(n_days);
    let first = month_key(dates[0]);
    let last = month_key(*dates.last().expect("n_days >= 2"));
    let n_months = (last - first + 1) as usize + k;
    let month_dates: Vec<NaiveDate> = (first - k as i32..=last).map(month_from_key).collect();
    let x1v = ar1(n_months, COVARIATE_AR, &mut rng);
    let x2v = ar1(n_months, COVARIATE_AR, &mut rng);
    let x1 = TimeSeries::monthly("x1", month_dates.clone(), x1v).map_err(|e| SimError::InvalidParams(e.to_string()))?;
    let x2 = TimeSeries::monthly("x2", month_dates, x2v).map_err(|e| SimError::InvalidParams(e.to_string()))?;

    let tau = long_run_component(params, k, &x1.values()[..n_months - 1], &x2.values()[..n_months - 1], form)
        .map_err(|e| SimError::InvalidParams(e.to_string()))?;
    let day_period: Vec<usize> = dates.iter().map(|d| (month_key(*d) - first) as usize).collect();

    let omega = params.omega();
    let mut h = 1.0;
    let mut prev = 0.0;
    let mut stv = Vec::with_capacity(n_days);
    let mut returns = Vec::with_capacity(n_days);
    let mut total_variance = Vec::with_capacity(n_days);
    for (i, &p) in day_period.iter().enumerate() {
        let t = tau[p];
        if i > 0 {
            let arch = if prev < 0.0 { params.alpha + params.gamma } else { params.alpha };
            h = omega + arch * prev * prev / t + params.beta * h;
        }
        let var = h * t;
        let eps = var.sqrt() * normal(&mut rng);
        stv.push(h);
        total_variance.push(var);
        returns.push(params.mu + eps);
        prev = eps;
    }
    let returns = ReturnSeries::new(dates, returns).map_err(|e| SimError::InvalidParams(e.to_string()))?;
    let data = MidasData::build(&returns, &x1, &x2, k).map_err(|e| SimError::InvalidParams(e.to_string()))?;
    Ok(GarchMidasSim { returns, x1, x2, stv, ltv: tau, total_variance, data })
}

#[derive(Debug, Clone)]
pub struct MsrSim {
    pub data: MsrData,
    pub regimes: Vec<usize>,
}

/// Simulates a switching regression. The switching design is a constant
/// followed by iid standard normal columns; non-switching regressors and
/// transition drivers are iid standard normal.
pub fn simulate_msr(params: &MsrParams, t_len: usize, seed: u64) -> Result<MsrSim> {
    let m = params.regimes();
    let kx = params.beta.first().map_or(0, Vec::len);
    let kz = params.phi.len();
    let ke = params.transition.n_covariates();
    if m < 2 || params.sigma.len() != m || params.sigma.iter().any(|s| !(*s > 0.0)) || t_len == 0 {
        return Err(SimError::InvalidParams("MSR parameters are not valid".into()));
    }
    let mut rng = stream(seed, 0);
    let mut x = DMatrix::<f64>::from_element(t_len, kx, 1.0);
    let mut z = DMatrix::<f64>::zeros(t_len, kz);
    let mut e = DMatrix::<f64>::zeros(t_len, ke);
    for t in 0..t_len {
        for c in 1..kx {
            x[(t, c)] = normal(&mut rng);
        }
        for c in 0..kz {
            z[(t, c)] = normal(&mut rng);
        }
        for c in 0..ke {
            e[(t, c)] = normal(&mut rng);
        }
    }
    let draw = |probs: &[f64], rng: &mut SimRng| {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (j, p) in probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return j;
            }
        }
        probs.len() - 1
    };
    let start = if ke == 0 { params.transition_at(&[]).ergodic() } else { vec![1.0 / m as f64; m] };
    let mut regimes = Vec::with_capacity(t_len);
    let mut y = Vec::with_capacity(t_len);
    let mut s = draw(&start, &mut rng);
    for t in 0..t_len {
        if t > 0 {
            let e_prev: Vec<f64> = e.row(t - 1).iter().copied().collect();
            let p = params.transition_at(&e_prev);
            let row: Vec<f64> = (0..m).map(|j| p.get(s, j)).collect();
            s = draw(&row, &mut rng);
        }
        let mean: f64 = (0..kx).map(|c| x[(t, c)] * params.beta[s][c]).sum::<f64>()
            + (0..kz).map(|c| z[(t, c)] * params.phi[c]).sum::<f64>();
        y.push(mean + params.sigma[s] * normal(&mut rng));
        regimes.push(s);
    }
    let data = MsrData::new(y, x, Some(z), Some(e)).map_err(|e| SimError::InvalidParams(e.to_string()))?;
    Ok(MsrSim { data, regimes })
}

/// `y = intercept + slope * x + e`, `x, e ~ N(0, 1)`.
pub fn simulate_location_shift(n: usize, intercept: f64, slope: f64, seed: u64) -> (Vec<f64>, DMatrix<f64>) {
    let mut rng = stream(seed, 0);
    let mut x = DMatrix::<f64>::from_element(n, 2, 1.0);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let xi = normal(&mut rng);
        x[(i, 1)] = xi;
        y.push(intercept + slope * xi + normal(&mut rng));
    }
    (y, x)
}

/// `y = x + x * e`, `x ~ U(1, 5)`, `e ~ N(0, 1)`: the `tau` slope is `1 + Phi^{-1}(tau)`.
pub fn simulate_location_scale(n: usize, seed: u64) -> (Vec<f64>, DMatrix<f64>) {
    let mut rng = stream(seed, 0);
    let mut x = DMatrix::<f64>::from_element(n, 2, 1.0);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let xi = rng.random_range(1.0..5.0);
        x[(i, 1)] = xi;
        y.push(xi + xi * normal(&mut rng));
    }
    (y, x)
}

/// Driftless Gaussian random walk started at zero.
pub fn random_walk(n: usize, rng: &mut SimRng) -> Vec<f64> {
    let mut level = 0.0;
    (0..n)
        .map(|_| {
            level += normal(rng);
            level
        })
        .collect()
}

pub fn white_noise(n: usize, rng: &mut SimRng) -> Vec<f64> {
    (0..n).map(|_| normal(rng)).collect()
}

/// Unit-variance noise whose mean jumps by `shift` from index `break_at` on.
pub fn mean_shift(n: usize, break_at: usize, shift: f64, rng: &mut SimRng) -> Vec<f64> {
    (0..n).map(|i| normal(rng) + if i >= break_at { shift } else { 0.0 }).collect()
}

/// Plain GARCH(1,1) returns with Gaussian innovations.
pub fn garch11(n: usize, omega: f64, alpha: f64, beta: f64, rng: &mut SimRng) -> Vec<f64> {
    let mut s2 = omega / (1.0 - alpha - beta);
    let mut prev = 0.0;
    (0..n)
        .map(|i| {
            if i > 0 {
                s2 = omega + alpha * prev * prev + beta * s2;
            }
            prev = s2.sqrt() * normal(rng);
            prev
        })
        .collect()
}
