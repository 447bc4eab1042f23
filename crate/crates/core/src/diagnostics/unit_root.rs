//! ADF and Phillips–Perron unit-root tests.
//!
//! Both share the Dickey–Fuller null distribution, so they share the
//! MacKinnon (2010) response-surface critical values below.

use nalgebra::DMatrix;

use super::{DiagnosticsError, Result};
use crate::linalg::{ols, OlsFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DeterministicTerms {
    None,
    Constant,
    ConstantTrend,
}

impl DeterministicTerms {
    pub fn name(self) -> &'static str {
        match self {
            DeterministicTerms::None => "none",
            DeterministicTerms::Constant => "constant",
            DeterministicTerms::ConstantTrend => "constant+trend",
        }
    }

    fn count(self) -> usize {
        match self {
            DeterministicTerms::None => 0,
            DeterministicTerms::Constant => 1,
            DeterministicTerms::ConstantTrend => 2,
        }
    }
}

/// Left-tail critical values at 1%, 5% and 10%.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalValues {
    pub one: f64,
    pub five: f64,
    pub ten: f64,
}

// MacKinnon (2010), single-series tau: b0 + b1/T + b2/T^2 + b3/T^3.
const SURFACE_NONE: [[f64; 4]; 3] = [
    [-2.56574, -2.2358, -3.627, 0.0],
    [-1.94100, -0.2686, -3.365, 31.223],
    [-1.61682, 0.2656, -2.714, 25.364],
];
const SURFACE_CONSTANT: [[f64; 4]; 3] = [
    [-3.43035, -6.5393, -16.786, -79.433],
    [-2.86154, -2.8903, -4.234, -40.040],
    [-2.56677, -1.5384, -2.809, 0.0],
];
const SURFACE_TREND: [[f64; 4]; 3] = [
    [-3.95877, -9.0531, -28.428, -134.155],
    [-3.41049, -4.3904, -9.036, -45.374],
    [-3.12705, -2.5856, -3.925, -22.380],
];

/// Response-surface critical values for a regression with `nobs` observations.
pub fn critical_values(terms: DeterministicTerms, nobs: usize) -> CriticalValues {
    let table = match terms {
        DeterministicTerms::None => &SURFACE_NONE,
        DeterministicTerms::Constant => &SURFACE_CONSTANT,
        DeterministicTerms::ConstantTrend => &SURFACE_TREND,
    };
    let t = nobs as f64;
    let eval = |b: &[f64; 4]| b[0] + b[1] / t + b[2] / (t * t) + b[3] / (t * t * t);
    CriticalValues { one: eval(&table[0]), five: eval(&table[1]), ten: eval(&table[2]) }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitRootResult {
    pub test: &'static str,
    pub statistic: f64,
    pub lags_used: usize,
    pub nobs: usize,
    pub critical_values: CriticalValues,
    pub reject_at_5pct: bool,
    pub deterministic_terms: DeterministicTerms,
}

/// A unit-root test selectable by name.
pub trait UnitRootTest: Send + Sync {
    fn name(&self) -> &'static str;
    fn run(&self, y: &[f64], terms: DeterministicTerms) -> Result<UnitRootResult>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Adf {
    /// `None` uses `floor(12 (n/100)^{1/4})`.
    pub max_lags: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct PhillipsPerron;

impl UnitRootTest for Adf {
    fn name(&self) -> &'static str {
        "adf"
    }

    fn run(&self, y: &[f64], terms: DeterministicTerms) -> Result<UnitRootResult> {
        let max_lags = self.max_lags.unwrap_or_else(|| default_max_lags(y.len()));
        adf_test(y, terms, max_lags)
    }
}

impl UnitRootTest for PhillipsPerron {
    fn name(&self) -> &'static str {
        "pp"
    }

    fn run(&self, y: &[f64], terms: DeterministicTerms) -> Result<UnitRootResult> {
        pp_test(y, terms)
    }
}

/// All registered unit-root tests, in report order.
pub fn registry() -> Vec<Box<dyn UnitRootTest>> {
    vec![Box::new(Adf::default()), Box::new(PhillipsPerron)]
}

pub fn lookup(name: &str) -> Option<Box<dyn UnitRootTest>> {
    registry().into_iter().find(|t| t.name() == name)
}

/// Schwert's rule.
pub fn default_max_lags(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}

fn check_variation(y: &[f64]) -> Result<()> {
    let first = y[0];
    if y.iter().all(|v| *v == first) {
        return Err(DiagnosticsError::SingularRegression);
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(DiagnosticsError::InvalidInput("non-finite value".into()));
    }
    Ok(())
}

/// Design for `dy[t] ~ y[t] + dy[t-1..t-lags] + deterministic + dummies`,
/// rows `t in start..dy.len()`.
fn adf_design(
    y: &[f64],
    dy: &[f64],
    lags: usize,
    start: usize,
    terms: DeterministicTerms,
    breaks: &[usize],
) -> (Vec<f64>, DMatrix<f64>) {
    let rows = dy.len() - start;
    let cols = 1 + lags + terms.count() + breaks.len();
    let mut x = DMatrix::zeros(rows, cols);
    let mut target = Vec::with_capacity(rows);
    for (r, t) in (start..dy.len()).enumerate() {
        target.push(dy[t]);
        x[(r, 0)] = y[t];
        for l in 1..=lags {
            x[(r, l)] = dy[t - l];
        }
        let mut c = 1 + lags;
        if terms.count() >= 1 {
            x[(r, c)] = 1.0;
            c += 1;
        }
        if terms.count() >= 2 {
            x[(r, c)] = (t + 1) as f64;
            c += 1;
        }
        // Level shift after each break: y index t+1 is the observation being explained.
        for &b in breaks {
            x[(r, c)] = if t + 1 > b { 1.0 } else { 0.0 };
            c += 1;
        }
    }
    (target, x)
}

fn t_ratio(fit: &OlsFit) -> f64 {
    fit.beta[0] / (fit.sigma2() * fit.xtx_inv[(0, 0)]).sqrt()
}

/// Augmented Dickey–Fuller test with BIC lag selection over `0..=max_lags`.
pub fn adf_test(y: &[f64], terms: DeterministicTerms, max_lags: usize) -> Result<UnitRootResult> {
    adf_test_with_breaks(y, terms, max_lags, &[])
}

/// ADF with level-shift dummies at the given break indices (the dummy is 1
/// for observations after `break`). Critical values are the no-break ones.
pub fn adf_test_with_breaks(
    y: &[f64],
    terms: DeterministicTerms,
    max_lags: usize,
    breaks: &[usize],
) -> Result<UnitRootResult> {
    let n = y.len();
    if n <= max_lags + 10 {
        return Err(DiagnosticsError::TooShort { needed: max_lags + 11, got: n });
    }
    check_variation(y)?;
    let dy: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();

    // Lag order chosen on the common sample, then refit on the longest sample.
    let mut best = (f64::INFINITY, 0usize);
    for lags in 0..=max_lags {
        let (target, x) = adf_design(y, &dy, lags, max_lags, terms, breaks);
        let Ok(fit) = ols(&target, &x) else { continue };
        let nobs = target.len() as f64;
        let bic = (fit.ssr / nobs).ln() + x.ncols() as f64 * nobs.ln() / nobs;
        if bic < best.0 {
            best = (bic, lags);
        }
    }
    let lags = best.1;
    let (target, x) = adf_design(y, &dy, lags, lags, terms, breaks);
    let fit = ols(&target, &x).map_err(|_| DiagnosticsError::SingularRegression)?;
    if fit.ssr <= 0.0 {
        return Err(DiagnosticsError::SingularRegression);
    }
    let statistic = t_ratio(&fit);
    let nobs = target.len();
    let cv = critical_values(terms, nobs);
    Ok(UnitRootResult {
        test: "adf",
        statistic,
        lags_used: lags,
        nobs,
        critical_values: cv,
        reject_at_5pct: statistic < cv.five,
        deterministic_terms: terms,
    })
}

/// Newey–West (1994) automatic bandwidth for the Bartlett kernel.
pub fn newey_west_lag(u: &[f64]) -> usize {
    let t = u.len();
    let pilot = (4.0 * (t as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize;
    let pilot = pilot.min(t.saturating_sub(1));
    let autocov = |j: usize| u[j..].iter().zip(u).map(|(a, b)| a * b).sum::<f64>() / t as f64;
    let mut s0 = autocov(0);
    let mut s1 = 0.0;
    for j in 1..=pilot {
        let g = autocov(j);
        s0 += 2.0 * g;
        s1 += 2.0 * j as f64 * g;
    }
    if s0 <= 0.0 {
        return 0;
    }
    let gamma = 1.1447 * ((s1 / s0).powi(2)).powf(1.0 / 3.0);
    ((gamma * (t as f64).powf(1.0 / 3.0)).floor() as usize).min(t - 1)
}

/// Bartlett-weighted long-run variance of `u` with `lags` autocovariances.
pub fn long_run_variance(u: &[f64], lags: usize) -> f64 {
    let t = u.len() as f64;
    let autocov = |j: usize| u[j..].iter().zip(u).map(|(a, b)| a * b).sum::<f64>() / t;
    let mut lrv = autocov(0);
    for j in 1..=lags {
        lrv += 2.0 * (1.0 - j as f64 / (lags as f64 + 1.0)) * autocov(j);
    }
    lrv
}

/// Phillips–Perron Z-tau test with a Bartlett long-run variance.
pub fn pp_test(y: &[f64], terms: DeterministicTerms) -> Result<UnitRootResult> {
    let n = y.len();
    if n <= 10 {
        return Err(DiagnosticsError::TooShort { needed: 11, got: n });
    }
    check_variation(y)?;
    let dy: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let (target, x) = adf_design(y, &dy, 0, 0, terms, &[]);
    let fit = ols(&target, &x).map_err(|_| DiagnosticsError::SingularRegression)?;
    if fit.ssr <= 0.0 {
        return Err(DiagnosticsError::SingularRegression);
    }
    let nobs = target.len();
    let t = nobs as f64;
    let u = fit.residuals.as_slice();
    let lags = newey_west_lag(u);
    let gamma0 = fit.ssr / t;
    let lambda2 = long_run_variance(u, lags);
    let s2 = fit.sigma2();
    let se = (s2 * fit.xtx_inv[(0, 0)]).sqrt();
    let tau = fit.beta[0] / se;
    let statistic =
        (gamma0 / lambda2).sqrt() * tau - 0.5 * (lambda2 - gamma0) / lambda2.sqrt() * (t * se / s2.sqrt());
    let cv = critical_values(terms, nobs);
    Ok(UnitRootResult {
        test: "pp",
        statistic,
        lags_used: lags,
        nobs,
        critical_values: cv,
        reject_at_5pct: statistic < cv.five,
        deterministic_terms: terms,
    })
}
