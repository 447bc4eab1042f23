//! Model pieces: long-run MIDAS component, unit-variance GJR short-run
//! recursion and the Gaussian quasi-likelihood of their product.

use chrono::NaiveDate;

use super::weights::fill_weights;
use super::{GarchMidasError, Result};
use crate::series::{month_from_key, month_key, ReturnSeries, TimeSeries};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LongRunForm {
    /// `tau = m + theta1 * X1~ + theta2 * X2~`
    Level,
    /// `tau = exp(m + theta1 * X1~ + theta2 * X2~)`
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GarchMidasParams {
    pub mu: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub beta: f64,
    pub m: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub w1_1: f64,
    pub w1_2: f64,
    pub w2_1: f64,
    pub w2_2: f64,
}

impl GarchMidasParams {
    pub fn persistence(&self) -> f64 {
        self.alpha + 0.5 * self.gamma + self.beta
    }

    /// Constant term of the short-run recursion (`a_0` in the unreparameterised form).
    pub fn omega(&self) -> f64 {
        1.0 - self.persistence()
    }

    pub fn is_admissible(&self) -> bool {
        self.alpha >= 0.0
            && self.beta >= 0.0
            && self.alpha + self.gamma >= 0.0
            && self.persistence() < 1.0
            && self.w1_1 >= 1.0
            && self.w1_2 >= 1.0
            && self.w2_1 >= 1.0
            && self.w2_2 >= 1.0
            && [self.mu, self.alpha, self.gamma, self.beta, self.m, self.theta1, self.theta2, self.w2_1, self.w2_2]
                .iter()
                .all(|v| v.is_finite())
    }
}

/// Long-run component for every period with a full `k`-lag history.
///
/// `x1` and `x2` are low-frequency histories in time order. Period `t` (for
/// `t = k..=len`) uses `x[t-1], ..., x[t-k]`, so the output has
/// `len - k + 1` entries; the last one belongs to the period after the data.
pub fn long_run_component(
    params: &GarchMidasParams,
    k: usize,
    x1: &[f64],
    x2: &[f64],
    form: LongRunForm,
) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(GarchMidasError::InvalidSpec("K must be >= 1".into()));
    }
    if x1.len() < k || x2.len() < k || x1.len() != x2.len() {
        return Err(GarchMidasError::InsufficientHistory { needed: k, got: x1.len().min(x2.len()) });
    }
    let mut w1 = vec![0.0; k];
    let mut w2 = vec![0.0; k];
    fill_weights(params.w1_1, params.w2_1, &mut w1);
    fill_weights(params.w1_2, params.w2_2, &mut w2);
    let mut out = Vec::with_capacity(x1.len() - k + 1);
    for t in k..=x1.len() {
        let f1: f64 = (0..k).map(|j| w1[j] * x1[t - 1 - j]).sum();
        let f2: f64 = (0..k).map(|j| w2[j] * x2[t - 1 - j]).sum();
        let index = params.m + params.theta1 * f1 + params.theta2 * f2;
        let tau = match form {
            LongRunForm::Log => index.exp(),
            LongRunForm::Level => {
                if !(index > 0.0) {
                    return Err(GarchMidasError::PositivityViolated { period: t - k, value: index });
                }
                index
            }
        };
        out.push(tau);
    }
    Ok(out)
}

/// Unit-variance GJR(1,1) recursion seeded at `h = 1`.
///
/// `eps` are demeaned returns, `tau_by_day` the long-run component of each
/// day's period.
pub fn short_run_recursion(alpha: f64, gamma: f64, beta: f64, eps: &[f64], tau_by_day: &[f64]) -> Result<Vec<f64>> {
    let persistence = alpha + 0.5 * gamma + beta;
    if persistence >= 1.0 {
        return Err(GarchMidasError::NonStationaryParams { persistence });
    }
    if alpha < 0.0 || beta < 0.0 || alpha + gamma < 0.0 {
        return Err(GarchMidasError::InvalidParams("alpha, beta and alpha + gamma must be non-negative".into()));
    }
    if tau_by_day.iter().any(|t| !(*t > 0.0)) {
        return Err(GarchMidasError::PositivityViolated { period: 0, value: 0.0 });
    }
    let mut h = Vec::with_capacity(eps.len());
    run_recursion(alpha, gamma, beta, eps, |i| tau_by_day[i], |hi| h.push(hi));
    Ok(h)
}

#[inline]
fn run_recursion(
    alpha: f64,
    gamma: f64,
    beta: f64,
    eps: &[f64],
    tau: impl Fn(usize) -> f64,
    mut sink: impl FnMut(f64),
) {
    let omega = 1.0 - alpha - 0.5 * gamma - beta;
    let mut h = 1.0;
    for i in 0..eps.len() {
        if i > 0 {
            let e = eps[i - 1];
            let arch = if e < 0.0 { alpha + gamma } else { alpha };
            h = omega + arch * e * e / tau(i) + beta * h;
        }
        sink(h);
    }
}

/// Estimation sample: daily returns with the covariate histories each
/// low-frequency period needs.
#[derive(Debug, Clone)]
pub struct MidasData {
    pub dates: Vec<NaiveDate>,
    pub returns: Vec<f64>,
    /// Period of each day, indexing `periods`.
    pub day_period: Vec<usize>,
    pub periods: Vec<NaiveDate>,
    pub k: usize,
    /// Covariate values for months `periods[0] - k ..= periods.last() - 1`.
    pub x1: Vec<f64>,
    pub x2: Vec<f64>,
}

impl MidasData {
    /// Keeps the days whose month has `k` prior covariate observations in
    /// both series; the kept months must be contiguous.
    pub fn build(returns: &ReturnSeries, x1: &TimeSeries, x2: &TimeSeries, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(GarchMidasError::InvalidSpec("K must be >= 1".into()));
        }
        let lookup = |s: &TimeSeries, key: i32| s.dates().binary_search(&month_from_key(key)).ok().map(|i| s.values()[i]);
        let has_history =
            |key: i32| (1..=k as i32).all(|j| lookup(x1, key - j).is_some() && lookup(x2, key - j).is_some());

        let first = returns
            .dates
            .iter()
            .position(|d| has_history(month_key(*d)))
            .ok_or(GarchMidasError::InsufficientHistory { needed: k, got: 0 })?;
        let mut dates = Vec::new();
        let mut rets = Vec::new();
        let mut day_period = Vec::new();
        let base = month_key(returns.dates[first]);
        let mut last_key = base;
        for (d, r) in returns.dates[first..].iter().zip(&returns.returns[first..]) {
            let key = month_key(*d);
            if !has_history(key) {
                break;
            }
            if key > last_key + 1 {
                break;
            }
            last_key = key;
            dates.push(*d);
            rets.push(*r);
            day_period.push((key - base) as usize);
        }
        let periods: Vec<NaiveDate> = (base..=last_key).map(month_from_key).collect();
        let hist = |s: &TimeSeries| -> Vec<f64> {
            (base - k as i32..last_key).map(|key| lookup(s, key).expect("history checked")).collect()
        };
        Ok(Self { dates, returns: rets, day_period, periods, k, x1: hist(x1), x2: hist(x2) })
    }

    /// Same sample with no covariates; every day still belongs to its month.
    pub fn without_covariates(returns: &ReturnSeries) -> Self {
        let base = month_key(returns.dates[0]);
        let last = month_key(*returns.dates.last().expect("non-empty returns"));
        let day_period = returns.dates.iter().map(|d| (month_key(*d) - base) as usize).collect();
        let periods: Vec<NaiveDate> = (base..=last).map(month_from_key).collect();
        let n = periods.len();
        Self {
            dates: returns.dates.clone(),
            returns: returns.returns.clone(),
            day_period,
            periods,
            k: 1,
            x1: vec![0.0; n],
            x2: vec![0.0; n],
        }
    }

    pub fn n_days(&self) -> usize {
        self.returns.len()
    }

    pub fn n_periods(&self) -> usize {
        self.periods.len()
    }

    /// Long-run component per estimation period.
    pub fn tau(&self, params: &GarchMidasParams, form: LongRunForm) -> Result<Vec<f64>> {
        let mut tau = long_run_component(params, self.k, &self.x1, &self.x2, form)?;
        tau.truncate(self.n_periods());
        Ok(tau)
    }
}

/// Variance paths at a parameter point.
#[derive(Debug, Clone)]
pub struct VariancePaths {
    pub h: Vec<f64>,
    pub tau: Vec<f64>,
    /// `h * tau` per day.
    pub total: Vec<f64>,
}

pub fn variance_paths(params: &GarchMidasParams, data: &MidasData, form: LongRunForm) -> Result<VariancePaths> {
    let tau = data.tau(params, form)?;
    let eps: Vec<f64> = data.returns.iter().map(|r| r - params.mu).collect();
    let tau_by_day: Vec<f64> = data.day_period.iter().map(|&p| tau[p]).collect();
    let h = short_run_recursion(params.alpha, params.gamma, params.beta, &eps, &tau_by_day)?;
    let total = h.iter().zip(&tau_by_day).map(|(a, b)| a * b).collect();
    Ok(VariancePaths { h, tau, total })
}

/// Per-day Gaussian log-likelihood contributions, `None` when infeasible.
pub fn loglik_contributions(params: &GarchMidasParams, data: &MidasData, form: LongRunForm) -> Option<Vec<f64>> {
    if !params.is_admissible() {
        return None;
    }
    let tau = data.tau(params, form).ok()?;
    let eps: Vec<f64> = data.returns.iter().map(|r| r - params.mu).collect();
    let mut h = Vec::with_capacity(eps.len());
    run_recursion(params.alpha, params.gamma, params.beta, &eps, |d| tau[data.day_period[d]], |v| h.push(v));
    let out: Vec<f64> = eps
        .iter()
        .zip(&h)
        .zip(&data.day_period)
        .map(|((e, hi), &p)| {
            let var = hi * tau[p];
            -HALF_LN_2PI - 0.5 * var.ln() - 0.5 * e * e / var
        })
        .collect();
    if out.iter().all(|v| v.is_finite()) { Some(out) } else { None }
}

/// Negative Gaussian quasi-log-likelihood; `+inf` outside the admissible set.
pub fn neg_log_likelihood(params: &GarchMidasParams, data: &MidasData, form: LongRunForm) -> f64 {
    if !params.is_admissible() {
        return f64::INFINITY;
    }
    let Ok(tau) = data.tau(params, form) else {
        return f64::INFINITY;
    };
    let omega = params.omega();
    let mut nll = 0.0;
    let mut h = 1.0;
    let mut prev = 0.0;
    let mut ln_tau_cache = (usize::MAX, 0.0);
    for (i, (&r, &p)) in data.returns.iter().zip(&data.day_period).enumerate() {
        let t = tau[p];
        if i > 0 {
            let arch = if prev < 0.0 { params.alpha + params.gamma } else { params.alpha };
            h = omega + arch * prev * prev / t + params.beta * h;
        }
        if ln_tau_cache.0 != p {
            ln_tau_cache = (p, t.ln());
        }
        let e = r - params.mu;
        nll += HALF_LN_2PI + 0.5 * (h.ln() + ln_tau_cache.1) + 0.5 * e * e / (h * t);
        prev = e;
    }
    if nll.is_finite() { nll } else { f64::INFINITY }
}
