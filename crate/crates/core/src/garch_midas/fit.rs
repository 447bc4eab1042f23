//! Quasi-maximum-likelihood estimation of the two-covariate GARCH-MIDAS model.
//!
//! Constrained parameters are optimised on an unconstrained scale:
//! `(alpha, gamma/2, beta, 1 - alpha - gamma/2 - beta)` is a softmax of three
//! free logits (the slack is the reference category), MIDAS shapes are
//! `1 + exp(u)`. A 3-point grid per natural parameter ranks start points;
//! BFGS runs from the best few and the lowest NLL wins (ties by grid order).

use nalgebra::DMatrix;

use super::model::{loglik_contributions, neg_log_likelihood, variance_paths, LongRunForm, MidasData};
use super::{GarchMidasError, GarchMidasParams, Result};
use crate::linalg::{mean, variance};
use crate::optim::{self, Bfgs};
use crate::report::{num, Table};
use crate::series::{ReturnSeries, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovarianceKind {
    /// Inverse numerical Hessian.
    Hessian,
    /// QML sandwich `H^{-1} (S'S) H^{-1}` with numerical per-day scores.
    Sandwich,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GarchMidasSpec {
    pub k: usize,
    pub w1_fixed: bool,
    pub long_run_form: LongRunForm,
    pub covariate_names: [String; 2],
    /// Fix `theta1 = theta2 = 0` (plain GJR with a constant long-run level).
    pub restrict_covariates: bool,
    pub covariance: CovarianceKind,
    /// BFGS runs launched from the best grid points.
    pub n_starts: usize,
    pub optimizer: Bfgs,
}

impl Default for GarchMidasSpec {
    fn default() -> Self {
        Self {
            k: 12,
            w1_fixed: true,
            long_run_form: LongRunForm::Log,
            covariate_names: ["x1".into(), "x2".into()],
            restrict_covariates: false,
            covariance: CovarianceKind::Hessian,
            n_starts: 3,
            optimizer: Bfgs::default(),
        }
    }
}

/// Minimum number of low-frequency periods in the estimation sample.
pub const MIN_PERIODS: usize = 12;

#[derive(Debug, Clone)]
pub struct GarchMidasFit {
    pub spec: GarchMidasSpec,
    pub params: GarchMidasParams,
    pub param_names: Vec<&'static str>,
    pub estimates: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub covariance: Option<DMatrix<f64>>,
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Short-run component per day.
    pub stv: TimeSeries,
    /// Long-run component per low-frequency period.
    pub ltv: TimeSeries,
    pub sample: MidasData,
}

/// Maps between natural parameters and the optimiser's free vector.
#[derive(Debug, Clone, Copy)]
struct Layout {
    restricted: bool,
    w1_free: bool,
}

impl Layout {
    fn new(spec: &GarchMidasSpec) -> Self {
        Self { restricted: spec.restrict_covariates, w1_free: !spec.w1_fixed && !spec.restrict_covariates }
    }

    fn names(&self) -> Vec<&'static str> {
        let mut names = vec!["mu", "alpha", "gamma", "beta", "m"];
        if !self.restricted {
            names.extend(["theta1", "theta2", "w2_1", "w2_2"]);
        }
        if self.w1_free {
            names.extend(["w1_1", "w1_2"]);
        }
        names
    }

    fn decode(&self, u: &[f64]) -> GarchMidasParams {
        let max = u[1].max(u[2]).max(u[3]).max(0.0);
        let (e1, e2, e3, e0) = ((u[1] - max).exp(), (u[2] - max).exp(), (u[3] - max).exp(), (-max).exp());
        let denom = e0 + e1 + e2 + e3;
        let mut p = GarchMidasParams {
            mu: u[0],
            alpha: e1 / denom,
            gamma: 2.0 * e2 / denom,
            beta: e3 / denom,
            m: u[4],
            theta1: 0.0,
            theta2: 0.0,
            w1_1: 1.0,
            w1_2: 1.0,
            w2_1: 1.0,
            w2_2: 1.0,
        };
        if !self.restricted {
            p.theta1 = u[5];
            p.theta2 = u[6];
            p.w2_1 = 1.0 + u[7].exp();
            p.w2_2 = 1.0 + u[8].exp();
        }
        if self.w1_free {
            p.w1_1 = 1.0 + u[9].exp();
            p.w1_2 = 1.0 + u[10].exp();
        }
        p
    }

    fn encode(&self, p: &GarchMidasParams) -> Vec<f64> {
        let slack = p.omega();
        let mut u = vec![p.mu, (p.alpha / slack).ln(), (0.5 * p.gamma / slack).ln(), (p.beta / slack).ln(), p.m];
        if !self.restricted {
            u.extend([p.theta1, p.theta2, (p.w2_1 - 1.0).ln(), (p.w2_2 - 1.0).ln()]);
        }
        if self.w1_free {
            u.extend([(p.w1_1 - 1.0).ln(), (p.w1_2 - 1.0).ln()]);
        }
        u
    }

    fn natural(&self, p: &GarchMidasParams) -> Vec<f64> {
        let mut v = vec![p.mu, p.alpha, p.gamma, p.beta, p.m];
        if !self.restricted {
            v.extend([p.theta1, p.theta2, p.w2_1, p.w2_2]);
        }
        if self.w1_free {
            v.extend([p.w1_1, p.w1_2]);
        }
        v
    }
}

fn std_dev(xs: &[f64]) -> f64 {
    let s = variance(xs).sqrt();
    if s > 0.0 { s } else { 1.0 }
}

/// Start grid in natural parameters, in a fixed order.
fn start_grid(data: &MidasData, spec: &GarchMidasSpec, layout: &Layout) -> Vec<GarchMidasParams> {
    let r_mean = mean(&data.returns);
    let r_var = variance(&data.returns);
    let r_sd = r_var.sqrt();
    let mus = [r_mean - 0.1 * r_sd, r_mean, r_mean + 0.1 * r_sd];
    let alphas = [0.02, 0.06, 0.12];
    let gammas = [0.02, 0.08, 0.20];
    let betas = [0.75, 0.85, 0.93];
    let (ms, theta_scale) = match spec.long_run_form {
        LongRunForm::Log => ([r_var.ln() - 0.5, r_var.ln(), r_var.ln() + 0.5], 1.0),
        LongRunForm::Level => ([0.5 * r_var, r_var, 1.5 * r_var], r_var),
    };
    let t1 = [-0.5, 0.0, 0.5].map(|v| v * theta_scale / std_dev(&data.x1));
    let t2 = [-0.5, 0.0, 0.5].map(|v| v * theta_scale / std_dev(&data.x2));
    let shapes = [1.5, 4.0, 10.0];
    let w1s = [1.5, 3.0, 6.0];

    let mut out = Vec::new();
    for &mu in &mus {
        for &alpha in &alphas {
            for &gamma in &gammas {
                for &beta in &betas {
                    if alpha + 0.5 * gamma + beta >= 0.999 {
                        continue;
                    }
                    for &m in &ms {
                        let base = GarchMidasParams {
                            mu,
                            alpha,
                            gamma,
                            beta,
                            m,
                            theta1: 0.0,
                            theta2: 0.0,
                            w1_1: 1.0,
                            w1_2: 1.0,
                            w2_1: 1.0,
                            w2_2: 1.0,
                        };
                        if layout.restricted {
                            out.push(base);
                            continue;
                        }
                        for &theta1 in &t1 {
                            for &theta2 in &t2 {
                                for &w2_1 in &shapes {
                                    for &w2_2 in &shapes {
                                        let p = GarchMidasParams { theta1, theta2, w2_1, w2_2, ..base };
                                        if layout.w1_free {
                                            for &w1_1 in &w1s {
                                                for &w1_2 in &w1s {
                                                    out.push(GarchMidasParams { w1_1, w1_2, ..p });
                                                }
                                            }
                                        } else {
                                            out.push(p);
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

/// Fits the model to daily returns and two monthly covariates.
pub fn fit(returns: &ReturnSeries, x1: &TimeSeries, x2: &TimeSeries, spec: &GarchMidasSpec) -> Result<GarchMidasFit> {
    let data = if spec.restrict_covariates {
        MidasData::without_covariates(returns)
    } else {
        MidasData::build(returns, x1, x2, spec.k)?
    };
    fit_data(data, spec)
}

/// Fits with `theta1 = theta2 = 0` on the full return sample.
pub fn fit_restricted(returns: &ReturnSeries, spec: &GarchMidasSpec) -> Result<GarchMidasFit> {
    let spec = GarchMidasSpec { restrict_covariates: true, ..spec.clone() };
    fit_data(MidasData::without_covariates(returns), &spec)
}

pub fn fit_data(data: MidasData, spec: &GarchMidasSpec) -> Result<GarchMidasFit> {
    if spec.k == 0 {
        return Err(GarchMidasError::InvalidSpec("K must be >= 1".into()));
    }
    if data.n_periods() < MIN_PERIODS || data.n_days() < 10 * MIN_PERIODS {
        return Err(GarchMidasError::InsufficientData(format!(
            "{} periods / {} days in the estimation sample, need {} periods",
            data.n_periods(),
            data.n_days(),
            MIN_PERIODS
        )));
    }
    let scale = data.returns.iter().fold(0f64, |a, r| a.max(r.abs()));
    if !(variance(&data.returns) > 1e-12 * scale * scale) {
        return Err(GarchMidasError::InsufficientData("returns have no variation".into()));
    }
    let layout = Layout::new(spec);
    let form = spec.long_run_form;
    let objective = |u: &[f64]| neg_log_likelihood(&layout.decode(u), &data, form);

    let mut ranked: Vec<(f64, usize, Vec<f64>)> = start_grid(&data, spec, &layout)
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let u = layout.encode(p);
            (objective(&u), i, u)
        })
        .filter(|(f, _, _)| f.is_finite())
        .collect();
    if ranked.is_empty() {
        return Err(GarchMidasError::InsufficientData("no feasible start point".into()));
    }
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut best: Option<optim::Minimum> = None;
    for (_, _, u0) in ranked.iter().take(spec.n_starts.max(1)) {
        let m = spec.optimizer.minimize(objective, u0);
        if best.as_ref().is_none_or(|b| m.f < b.f) {
            best = Some(m);
        }
    }
    let best = best.expect("at least one start");
    let params = layout.decode(&best.x);

    let to_natural = |u: &[f64]| layout.natural(&layout.decode(u));
    let hess = optim::hessian(&objective, &best.x);
    let covariance = match spec.covariance {
        CovarianceKind::Hessian => optim::delta_method_covariance(&hess, &to_natural, &best.x),
        CovarianceKind::Sandwich => sandwich(&hess, &layout, &data, form, &best.x).and_then(|cov_u| {
            let jac = optim::jacobian(&to_natural, &best.x);
            let cov = &jac * cov_u * jac.transpose();
            Some((&cov + cov.transpose()) * 0.5)
        }),
    };
    let estimates = layout.natural(&params);
    let std_errors = match &covariance {
        Some(c) => (0..estimates.len()).map(|i| c[(i, i)].max(0.0).sqrt()).collect(),
        None => vec![f64::NAN; estimates.len()],
    };

    let paths = variance_paths(&params, &data, form)?;
    let stv = TimeSeries::daily("stv", data.dates.clone(), paths.h)
        .map_err(|e| GarchMidasError::InvalidSpec(e.to_string()))?;
    let ltv = TimeSeries::monthly("ltv", data.periods.clone(), paths.tau)
        .map_err(|e| GarchMidasError::InvalidSpec(e.to_string()))?;

    Ok(GarchMidasFit {
        spec: spec.clone(),
        params,
        param_names: layout.names(),
        estimates,
        std_errors,
        covariance,
        loglik: -best.f,
        converged: best.converged,
        iterations: best.iterations,
        stv,
        ltv,
        sample: data,
    })
}

fn sandwich(hess: &DMatrix<f64>, layout: &Layout, data: &MidasData, form: LongRunForm, u: &[f64]) -> Option<DMatrix<f64>> {
    let h_inv = optim::symmetric_inverse(hess)?;
    let contributions = |x: &[f64]| {
        loglik_contributions(&layout.decode(x), data, form).unwrap_or_else(|| vec![f64::NAN; data.n_days()])
    };
    let scores = optim::jacobian(&contributions, u);
    if scores.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let meat = scores.tr_mul(&scores);
    Some(&h_inv * meat * &h_inv)
}

impl GarchMidasFit {
    pub fn nobs(&self) -> usize {
        self.sample.n_days()
    }

    /// Fails with `NoConvergence` when the optimiser did not meet its tolerances.
    pub fn require_converged(&self) -> Result<&Self> {
        if self.converged { Ok(self) } else { Err(GarchMidasError::NoConvergence) }
    }

    pub fn estimate(&self, name: &str) -> Option<(f64, f64)> {
        let i = self.param_names.iter().position(|n| *n == name)?;
        Some((self.estimates[i], self.std_errors[i]))
    }

    /// `h * tau` per day, with `tau` broadcast from each day's period.
    pub fn total_variance(&self) -> Vec<f64> {
        self.stv
            .values()
            .iter()
            .zip(&self.sample.day_period)
            .map(|(h, &p)| h * self.ltv.values()[p])
            .collect()
    }

    /// Parameter table: name, estimate, standard error, t-ratio.
    pub fn param_table(&self) -> Table {
        let mut t = Table::new(["parameter", "estimate", "std_error", "t_ratio"]);
        for ((name, est), se) in self.param_names.iter().zip(&self.estimates).zip(&self.std_errors) {
            let label = match *name {
                "theta1" => format!("theta1 ({})", self.spec.covariate_names[0]),
                "theta2" => format!("theta2 ({})", self.spec.covariate_names[1]),
                other => other.to_string(),
            };
            t.push([label, num(*est), num(*se), num(est / se)]);
        }
        t
    }

    /// Plain-text report: parameter table plus fit summary lines.
    pub fn report(&self) -> String {
        let form = match self.spec.long_run_form {
            LongRunForm::Log => "log",
            LongRunForm::Level => "level",
        };
        let mut out = String::new();
        out.push_str(&format!("GARCH-MIDAS (K = {}, long-run form = {form})\n\n", self.spec.k));
        out.push_str(&self.param_table().to_text());
        out.push_str(&format!("\nlog-likelihood  {}\n", num(self.loglik)));
        out.push_str(&format!("observations    {}\n", self.nobs()));
        out.push_str(&format!("periods         {}\n", self.sample.n_periods()));
        out.push_str(&format!("converged       {}\n", self.converged));
        out
    }
}

/// Short- and long-run volatility series of a fit.
pub fn extract_volatilities(fit: &GarchMidasFit, force: bool) -> Result<(TimeSeries, TimeSeries)> {
    if !fit.converged && !force {
        return Err(GarchMidasError::NotFitted);
    }
    Ok((fit.stv.clone(), fit.ltv.clone()))
}
