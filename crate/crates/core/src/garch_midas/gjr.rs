//! Plain GJR-GARCH(1,1) with a Gaussian quasi-likelihood, estimated
//! independently of the MIDAS machinery. With a constant long-run level the
//! two models share a likelihood, so this is a cross-check on the restricted fit.

use nalgebra::DMatrix;

use super::{GarchMidasError, Result};
use crate::linalg::{mean, variance};
use crate::optim::{self, Bfgs};
use crate::series::ReturnSeries;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GjrParams {
    pub mu: f64,
    pub omega: f64,
    pub alpha: f64,
    pub gamma: f64,
    pub beta: f64,
}

impl GjrParams {
    pub fn persistence(&self) -> f64 {
        self.alpha + 0.5 * self.gamma + self.beta
    }

    pub fn unconditional_variance(&self) -> f64 {
        self.omega / (1.0 - self.persistence())
    }
}

#[derive(Debug, Clone)]
pub struct GjrFit {
    pub params: GjrParams,
    pub std_errors: Vec<f64>,
    pub covariance: Option<DMatrix<f64>>,
    pub loglik: f64,
    pub converged: bool,
    pub conditional_variance: Vec<f64>,
}

/// Negative log-likelihood; the recursion starts at the unconditional variance.
pub fn gjr_neg_log_likelihood(p: &GjrParams, returns: &[f64]) -> f64 {
    if !(p.omega > 0.0 && p.alpha >= 0.0 && p.beta >= 0.0 && p.alpha + p.gamma >= 0.0 && p.persistence() < 1.0) {
        return f64::INFINITY;
    }
    let mut s2 = p.unconditional_variance();
    let mut prev = 0.0;
    let mut nll = 0.0;
    for (i, r) in returns.iter().enumerate() {
        if i > 0 {
            let arch = if prev < 0.0 { p.alpha + p.gamma } else { p.alpha };
            s2 = p.omega + arch * prev * prev + p.beta * s2;
        }
        let e = r - p.mu;
        nll += HALF_LN_2PI + 0.5 * s2.ln() + 0.5 * e * e / s2;
        prev = e;
    }
    if nll.is_finite() { nll } else { f64::INFINITY }
}

fn decode(u: &[f64]) -> GjrParams {
    let max = u[2].max(u[3]).max(u[4]).max(0.0);
    let e = [(-max).exp(), (u[2] - max).exp(), (u[3] - max).exp(), (u[4] - max).exp()];
    let d: f64 = e.iter().sum();
    GjrParams { mu: u[0], omega: u[1].exp(), alpha: e[1] / d, gamma: 2.0 * e[2] / d, beta: e[3] / d }
}

fn encode(p: &GjrParams) -> Vec<f64> {
    let slack = 1.0 - p.persistence();
    vec![p.mu, p.omega.ln(), (p.alpha / slack).ln(), (0.5 * p.gamma / slack).ln(), (p.beta / slack).ln()]
}

pub fn fit_gjr(returns: &ReturnSeries, optimizer: &Bfgs) -> Result<GjrFit> {
    let r = &returns.returns;
    if r.len() < 30 || !(variance(r) > 0.0) {
        return Err(GarchMidasError::InsufficientData("need at least 30 non-constant returns".into()));
    }
    let (m, v) = (mean(r), variance(r));
    let objective = |u: &[f64]| gjr_neg_log_likelihood(&decode(u), r);

    let mut starts = Vec::new();
    for alpha in [0.02, 0.06, 0.12] {
        for gamma in [0.02, 0.08, 0.20] {
            for beta in [0.75, 0.85, 0.93] {
                let p = alpha + 0.5 * gamma + beta;
                if p >= 0.999 {
                    continue;
                }
                let u = encode(&GjrParams { mu: m, omega: v * (1.0 - p), alpha, gamma, beta });
                starts.push((objective(&u), starts.len(), u));
            }
        }
    }
    starts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let best = starts
        .iter()
        .take(3)
        .map(|(_, _, u0)| optimizer.minimize(objective, u0))
        .reduce(|a, b| if b.f < a.f { b } else { a })
        .expect("non-empty start set");

    let params = decode(&best.x);
    let natural = |u: &[f64]| {
        let p = decode(u);
        vec![p.mu, p.omega, p.alpha, p.gamma, p.beta]
    };
    let hess = optim::hessian(&objective, &best.x);
    let covariance = optim::delta_method_covariance(&hess, &natural, &best.x);
    let std_errors = match &covariance {
        Some(c) => (0..5).map(|i| c[(i, i)].max(0.0).sqrt()).collect(),
        None => vec![f64::NAN; 5],
    };

    let mut s2 = params.unconditional_variance();
    let mut conditional_variance = vec![s2];
    for prev in r.iter().take(r.len() - 1).map(|x| x - params.mu) {
        let arch = if prev < 0.0 { params.alpha + params.gamma } else { params.alpha };
        s2 = params.omega + arch * prev * prev + params.beta * s2;
        conditional_variance.push(s2);
    }

    Ok(GjrFit { params, std_errors, covariance, loglik: -best.f, converged: best.converged, conditional_variance })
}
