//! Markov-switching regression `y_t = x_t' beta_{s_t} + z_t' phi + sigma_{s_t} e_t`
//! estimated by direct filtered maximum likelihood.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::filter::{
    expected_durations, hamilton_filter_core, kim_smoother, transition_logit, FilterOutput, TransitionCoefs,
    TransitionMatrix,
};
use super::{MarkovError, Result};
use crate::linalg::{ols, variance};
use crate::optim::{self, Bfgs};
use crate::report::{num, Table};
use crate::simulation::rng::stream;

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

#[derive(Debug, Clone, PartialEq)]
pub struct MsrSpec {
    pub regimes: usize,
    /// Regressors with regime-specific coefficients (include a constant column explicitly).
    pub switching: Vec<String>,
    pub non_switching: Vec<String>,
    pub switching_variance: bool,
    /// Transition drivers; empty means constant transition probabilities.
    pub transition_covariates: Vec<String>,
    pub n_starts: usize,
    pub seed: u64,
    pub optimizer: Bfgs,
}

impl Default for MsrSpec {
    fn default() -> Self {
        Self {
            regimes: 2,
            switching: vec!["const".into()],
            non_switching: Vec::new(),
            switching_variance: true,
            transition_covariates: Vec::new(),
            n_starts: 8,
            seed: 20_240_101,
            optimizer: Bfgs::default(),
        }
    }
}

/// Dependent variable and design matrices, rows aligned in time.
#[derive(Debug, Clone)]
pub struct MsrData {
    pub y: Vec<f64>,
    /// Switching regressors, T x kx.
    pub x: DMatrix<f64>,
    /// Non-switching regressors, T x kz.
    pub z: DMatrix<f64>,
    /// Transition drivers, T x ke; row `t - 1` drives the move into `t`.
    pub e: DMatrix<f64>,
}

impl MsrData {
    pub fn new(y: Vec<f64>, x: DMatrix<f64>, z: Option<DMatrix<f64>>, e: Option<DMatrix<f64>>) -> Result<Self> {
        let t = y.len();
        let z = z.unwrap_or_else(|| DMatrix::zeros(t, 0));
        let e = e.unwrap_or_else(|| DMatrix::zeros(t, 0));
        if x.nrows() != t || z.nrows() != t || e.nrows() != t {
            return Err(MarkovError::InvalidSpec("design matrices must have one row per observation".into()));
        }
        if y.iter().chain(x.iter()).chain(z.iter()).chain(e.iter()).any(|v| !v.is_finite()) {
            return Err(MarkovError::InvalidSpec("non-finite value in the data".into()));
        }
        Ok(Self { y, x, z, e })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    fn e_row(&self, t: usize) -> Vec<f64> {
        self.e.row(t).iter().copied().collect()
    }

    fn e_mean(&self) -> Vec<f64> {
        (0..self.e.ncols()).map(|c| self.e.column(c).mean()).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MsrParams {
    /// Regime-major, `beta[m][k]`.
    pub beta: Vec<Vec<f64>>,
    pub phi: Vec<f64>,
    pub sigma: Vec<f64>,
    pub transition: TransitionCoefs,
}

impl MsrParams {
    pub fn regimes(&self) -> usize {
        self.beta.len()
    }

    /// Transition matrix at covariate values `e` (empty for constant transitions).
    pub fn transition_at(&self, e: &[f64]) -> TransitionMatrix {
        transition_logit(e, &self.transition)
    }

    /// Regimes renamed so new regime `k` is old regime `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Self {
            beta: order.iter().map(|&o| self.beta[o].clone()).collect(),
            phi: self.phi.clone(),
            sigma: order.iter().map(|&o| self.sigma[o]).collect(),
            transition: self.transition.permuted(order),
        }
    }

    /// Order regimes by descending sigma (stable for ties).
    pub fn relabeled(&self) -> Self {
        let mut order: Vec<usize> = (0..self.regimes()).collect();
        order.sort_by(|&a, &b| self.sigma[b].total_cmp(&self.sigma[a]));
        self.permuted(&order)
    }
}

fn check_conformable(params: &MsrParams, data: &MsrData) -> Result<()> {
    let m = params.regimes();
    let ok = m >= 2
        && params.sigma.len() == m
        && params.beta.iter().all(|b| b.len() == data.x.ncols())
        && params.phi.len() == data.z.ncols()
        && params.transition.regimes() == m
        && params.transition.n_covariates() == data.e.ncols();
    if !ok {
        return Err(MarkovError::InvalidSpec("parameters are not conformable with the data".into()));
    }
    if params.sigma.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
        return Err(MarkovError::InvalidSpec("regime standard deviations must be positive".into()));
    }
    Ok(())
}

fn log_densities(params: &MsrParams, data: &MsrData) -> DMatrix<f64> {
    let m = params.regimes();
    let t_len = data.len();
    let ln_sigma: Vec<f64> = params.sigma.iter().map(|s| s.ln()).collect();
    let mut out = DMatrix::<f64>::zeros(t_len, m);
    for t in 0..t_len {
        let common: f64 = (0..data.z.ncols()).map(|c| data.z[(t, c)] * params.phi[c]).sum();
        for j in 0..m {
            let mean: f64 = common + (0..data.x.ncols()).map(|c| data.x[(t, c)] * params.beta[j][c]).sum::<f64>();
            let r = (data.y[t] - mean) / params.sigma[j];
            out[(t, j)] = -HALF_LN_2PI - ln_sigma[j] - 0.5 * r * r;
        }
    }
    out
}

fn default_initial(params: &MsrParams, data: &MsrData) -> Vec<f64> {
    if data.e.ncols() == 0 {
        params.transition_at(&[]).ergodic()
    } else {
        vec![1.0 / params.regimes() as f64; params.regimes()]
    }
}

fn run_filter(params: &MsrParams, data: &MsrData, initial: Option<&[f64]>) -> Result<FilterOutput> {
    check_conformable(params, data)?;
    let dens = log_densities(params, data);
    let init = initial.map_or_else(|| default_initial(params, data), <[f64]>::to_vec);
    if data.e.ncols() == 0 {
        let p = params.transition_at(&[]);
        hamilton_filter_core(&dens, |_| p.clone(), &init)
    } else {
        hamilton_filter_core(&dens, |t| params.transition_at(&data.e_row(t - 1)), &init)
    }
}

/// Filtered regime probabilities (T x M) and the log-likelihood. `initial`
/// overrides the prior on the first period's regime.
pub fn hamilton_filter(params: &MsrParams, data: &MsrData, initial: Option<&[f64]>) -> Result<(DMatrix<f64>, f64)> {
    let out = run_filter(params, data, initial)?;
    Ok((out.filtered, out.loglik))
}

/// Smoothed regime probabilities (T x M) at a parameter point.
pub fn smoothed_probabilities(params: &MsrParams, data: &MsrData, initial: Option<&[f64]>) -> Result<DMatrix<f64>> {
    let out = run_filter(params, data, initial)?;
    Ok(if data.e.ncols() == 0 {
        let p = params.transition_at(&[]);
        kim_smoother(&out, |_| p.clone())
    } else {
        kim_smoother(&out, |t| params.transition_at(&data.e_row(t - 1)))
    })
}

/// Free-vector layout: beta (M*kx), phi (kz), ln sigma (M or 1), transition logits.
#[derive(Debug, Clone, Copy)]
struct Layout {
    m: usize,
    kx: usize,
    kz: usize,
    ke: usize,
    switching_variance: bool,
}

impl Layout {
    fn n_sigma(&self) -> usize {
        if self.switching_variance { self.m } else { 1 }
    }

    fn n_transition(&self) -> usize {
        self.m * (self.m - 1) * (1 + self.ke)
    }

    fn len(&self) -> usize {
        self.m * self.kx + self.kz + self.n_sigma() + self.n_transition()
    }

    fn decode(&self, u: &[f64]) -> MsrParams {
        let mut i = 0;
        let beta = (0..self.m)
            .map(|_| {
                let b = u[i..i + self.kx].to_vec();
                i += self.kx;
                b
            })
            .collect();
        let phi = u[i..i + self.kz].to_vec();
        i += self.kz;
        let sigma = if self.switching_variance {
            u[i..i + self.m].iter().map(|v| v.exp()).collect()
        } else {
            vec![u[i].exp(); self.m]
        };
        i += self.n_sigma();
        let transition = TransitionCoefs::from_values(self.m, self.ke, u[i..].to_vec()).expect("layout length");
        MsrParams { beta, phi, sigma, transition }
    }

    fn encode(&self, p: &MsrParams) -> Vec<f64> {
        let mut u: Vec<f64> = p.beta.iter().flatten().copied().collect();
        u.extend(&p.phi);
        if self.switching_variance {
            u.extend(p.sigma.iter().map(|s| s.ln()));
        } else {
            u.push(p.sigma[0].ln());
        }
        u.extend(p.transition.values());
        u
    }
}

#[derive(Debug, Clone)]
pub struct MsrFit {
    pub spec: MsrSpec,
    pub params: MsrParams,
    pub param_names: Vec<String>,
    pub estimates: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub covariance: Option<DMatrix<f64>>,
    pub loglik: f64,
    pub converged: bool,
    /// Log-likelihood at each multi-start initial point.
    pub start_logliks: Vec<f64>,
    pub filtered: DMatrix<f64>,
    pub smoothed: DMatrix<f64>,
    /// Constant transition matrix, or the matrix at the sample-mean drivers.
    pub transition: TransitionMatrix,
    pub durations: Vec<f64>,
    pub nobs: usize,
}

fn natural_names(spec: &MsrSpec, layout: &Layout) -> Vec<String> {
    let mut names = Vec::new();
    for r in 1..=layout.m {
        for k in 0..layout.kx {
            names.push(format!("beta_{r}[{}]", spec.switching.get(k).map_or("?", String::as_str)));
        }
    }
    for k in 0..layout.kz {
        names.push(format!("phi[{}]", spec.non_switching.get(k).map_or("?", String::as_str)));
    }
    if layout.switching_variance {
        names.extend((1..=layout.m).map(|r| format!("sigma_{r}")));
    } else {
        names.push("sigma".into());
    }
    if layout.ke == 0 {
        for i in 1..=layout.m {
            for j in 1..=layout.m {
                names.push(format!("p{i}{j}"));
            }
        }
    } else {
        for i in 1..=layout.m {
            for j in 1..layout.m {
                names.push(format!("psi_{i}{j}[const]"));
                for k in 0..layout.ke {
                    names.push(format!("psi_{i}{j}[{}]", spec.transition_covariates.get(k).map_or("?", String::as_str)));
                }
            }
        }
    }
    names
}

fn natural_values(p: &MsrParams, layout: &Layout) -> Vec<f64> {
    let mut v: Vec<f64> = p.beta.iter().flatten().copied().collect();
    v.extend(&p.phi);
    if layout.switching_variance {
        v.extend(&p.sigma);
    } else {
        v.push(p.sigma[0]);
    }
    if layout.ke == 0 {
        v.extend(p.transition_at(&[]).matrix().transpose().iter());
    } else {
        v.extend(p.transition.values());
    }
    v
}

/// Number of free parameters implied by a spec and data.
pub fn parameter_count(spec: &MsrSpec, data: &MsrData) -> usize {
    Layout { m: spec.regimes, kx: data.x.ncols(), kz: data.z.ncols(), ke: data.e.ncols(), switching_variance: spec.switching_variance }
        .len()
}

fn start_points(spec: &MsrSpec, data: &MsrData, layout: &Layout) -> Result<Vec<MsrParams>> {
    let m = layout.m;
    let full = DMatrix::from_fn(data.len(), layout.kx + layout.kz, |t, c| {
        if c < layout.kx { data.x[(t, c)] } else { data.z[(t, c - layout.kx)] }
    });
    let (b, s) = if full.ncols() == 0 {
        (Vec::new(), variance(&data.y).sqrt())
    } else {
        let fit = ols(&data.y, &full).map_err(|_| MarkovError::InvalidSpec("regressors are collinear".into()))?;
        (fit.beta.iter().copied().collect::<Vec<_>>(), fit.sigma2().sqrt())
    };
    if !(s > 0.0) {
        return Err(MarkovError::InsufficientData("residual variance is zero".into()));
    }
    let col_sd: Vec<f64> = (0..layout.kx)
        .map(|c| {
            let col: Vec<f64> = data.x.column(c).iter().copied().collect();
            let sd = variance(&col).sqrt();
            if sd > 1e-12 { sd } else { 1.0 }
        })
        .collect();
    let ols_beta = &b[..layout.kx];
    let phi = b[layout.kx..].to_vec();

    let constant_transition = |stay: &[f64]| {
        let p = DMatrix::from_fn(m, m, |i, j| if i == j { stay[i] } else { (1.0 - stay[i]) / (m - 1) as f64 });
        let tm = TransitionMatrix::new(p).expect("valid start matrix");
        TransitionCoefs::from_matrix(&tm, layout.ke)
    };

    let mut starts = Vec::with_capacity(spec.n_starts.max(1));
    // Deterministic start: OLS coefficients in every regime, spread-out sigmas.
    let spread = |j: usize| if m == 1 { 0.0 } else { 0.5 - j as f64 / (m - 1) as f64 };
    starts.push(MsrParams {
        beta: vec![ols_beta.to_vec(); m],
        phi: phi.clone(),
        sigma: (0..m).map(|j| if layout.switching_variance { s * spread(j).exp() } else { s }).collect(),
        transition: constant_transition(&vec![0.9; m]),
    });
    let mut rng = stream(spec.seed, 0);
    while starts.len() < spec.n_starts.max(1) {
        let beta = (0..m)
            .map(|_| {
                (0..layout.kx)
                    .map(|c| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        ols_beta[c] + 0.75 * z * s / col_sd[c]
                    })
                    .collect()
            })
            .collect();
        let shared = s * rng.random_range(-0.5..0.5f64).exp();
        let sigma =
            (0..m).map(|_| if layout.switching_variance { s * rng.random_range(-1.0..1.0f64).exp() } else { shared }).collect();
        let stay: Vec<f64> = (0..m).map(|_| rng.random_range(0.6..0.97)).collect();
        starts.push(MsrParams { beta, phi: phi.clone(), sigma, transition: constant_transition(&stay) });
    }
    Ok(starts)
}

/// Fits the model by filtered maximum likelihood from seeded multi-starts.
pub fn fit_msr(spec: &MsrSpec, data: &MsrData) -> Result<MsrFit> {
    if spec.regimes < 2 || spec.regimes > 4 {
        return Err(MarkovError::InvalidSpec(format!("regime count {} outside 2..=4", spec.regimes)));
    }
    let layout = Layout {
        m: spec.regimes,
        kx: data.x.ncols(),
        kz: data.z.ncols(),
        ke: data.e.ncols(),
        switching_variance: spec.switching_variance,
    };
    let k = layout.len();
    if data.len() < 10 * k {
        return Err(MarkovError::InsufficientData(format!("{} observations for {k} parameters, need {}", data.len(), 10 * k)));
    }
    let objective = |u: &[f64]| match run_filter(&layout.decode(u), data, None) {
        Ok(out) if out.loglik.is_finite() => -out.loglik,
        _ => f64::INFINITY,
    };

    let starts = start_points(spec, data, &layout)?;
    let start_u: Vec<Vec<f64>> = starts.iter().map(|p| layout.encode(p)).collect();
    let start_logliks: Vec<f64> = start_u.iter().map(|u| -objective(u)).collect();
    let results: Vec<optim::Minimum> = start_u.par_iter().map(|u0| spec.optimizer.minimize(objective, u0)).collect();
    let best = results
        .into_iter()
        .reduce(|a, b| if b.f < a.f { b } else { a })
        .expect("at least one start");
    if !best.f.is_finite() {
        return Err(MarkovError::NoConvergence);
    }

    let params = layout.decode(&best.x).relabeled();
    let u_star = layout.encode(&params);
    let hess = optim::hessian(&objective, &u_star);
    let to_natural = |u: &[f64]| natural_values(&layout.decode(u), &layout);
    let covariance = optim::delta_method_covariance(&hess, &to_natural, &u_star);
    let estimates = natural_values(&params, &layout);
    let std_errors = match &covariance {
        Some(c) => (0..estimates.len()).map(|i| c[(i, i)].max(0.0).sqrt()).collect(),
        None => vec![f64::NAN; estimates.len()],
    };

    let out = run_filter(&params, data, None)?;
    let smoothed = smoothed_probabilities(&params, data, None)?;
    let transition = params.transition_at(&data.e_mean());
    let durations = expected_durations(&transition);

    Ok(MsrFit {
        spec: spec.clone(),
        param_names: natural_names(spec, &layout),
        estimates,
        std_errors,
        covariance,
        loglik: out.loglik,
        converged: best.converged,
        start_logliks,
        filtered: out.filtered,
        smoothed,
        transition,
        durations,
        nobs: data.len(),
        params,
    })
}

impl MsrFit {
    pub fn require_converged(&self) -> Result<&Self> {
        if self.converged { Ok(self) } else { Err(MarkovError::NoConvergence) }
    }

    pub fn estimate(&self, name: &str) -> Option<(f64, f64)> {
        let i = self.param_names.iter().position(|n| n == name)?;
        Some((self.estimates[i], self.std_errors[i]))
    }

    /// Per-regime coefficient table.
    pub fn coefficient_table(&self) -> Table {
        let mut t = Table::new(["parameter", "estimate", "std_error", "t_ratio"]);
        for ((name, est), se) in self.param_names.iter().zip(&self.estimates).zip(&self.std_errors) {
            if name.starts_with('p') && name[1..].chars().all(|c| c.is_ascii_digit()) {
                continue;
            }
            t.push([name.clone(), num(*est), num(*se), num(est / se)]);
        }
        t
    }

    pub fn transition_table(&self) -> Table {
        let m = self.transition.regimes();
        let mut t = Table::new(std::iter::once("from".to_string()).chain((1..=m).map(|j| format!("to_{j}"))));
        for i in 0..m {
            t.push(std::iter::once(format!("regime_{}", i + 1)).chain((0..m).map(|j| num(self.transition.get(i, j)))));
        }
        t
    }

    pub fn durations_table(&self) -> Table {
        let mut t = Table::new(["regime", "sigma", "stay_probability", "expected_duration"]);
        for (i, d) in self.durations.iter().enumerate() {
            t.push([format!("regime_{}", i + 1), num(self.params.sigma[i]), num(self.transition.get(i, i)), num(*d)]);
        }
        t
    }

    pub fn report(&self) -> String {
        let mut out = format!("Markov-switching regression ({} regimes, regime 1 = highest sigma)\n\n", self.spec.regimes);
        out.push_str(&self.coefficient_table().to_text());
        out.push_str("\nTransition probabilities\n");
        out.push_str(&self.transition_table().to_text());
        out.push_str("\nExpected durations\n");
        out.push_str(&self.durations_table().to_text());
        out.push_str(&format!("\nlog-likelihood  {}\nobservations    {}\nconverged       {}\n", num(self.loglik), self.nobs, self.converged));
        out
    }
}
