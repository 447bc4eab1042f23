//! Linear quantile regression: exact simplex fits, Powell kernel covariance,
//! pseudo-R² and quantile processes.

mod inference;
mod process;
mod simplex;

use nalgebra::{DMatrix, DVector};

pub use inference::{
    bandwidth_rule, bandwidth_rules, hall_sheather_bandwidth, kernel, kernels, powell_covariance, residual_bandwidth,
    BandwidthRule, Bofinger, Chamberlain, Epanechnikov, Gaussian, HallSheather, Kernel,
};
pub use process::{default_taus, quantile_process, QuantileProcess};
pub use simplex::{solve, SimplexSolution};
pub(crate) use inference::quantile_sorted;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QrError {
    #[error("quantile {0} is not in (0, 1)")]
    InvalidTau(f64),
    #[error("design matrix is rank deficient")]
    RankDeficient,
    #[error("sample of {0} is too small for a bandwidth (need >= 10)")]
    TooSmallSample(usize),
    #[error("kernel Hessian is singular; bandwidth too small or residuals too sparse near zero")]
    SingularH,
    #[error("model has no intercept column")]
    NoIntercept,
    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, QrError>;

/// `w * (tau - 1[w < 0])`.
pub fn check_loss(w: f64, tau: f64) -> f64 {
    if w < 0.0 { w * (tau - 1.0) } else { w * tau }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QrOptions {
    pub bandwidth: String,
    pub kernel: String,
    /// Significance level inside the bandwidth rule.
    pub alpha: f64,
}

impl Default for QrOptions {
    fn default() -> Self {
        Self { bandwidth: "hall-sheather".into(), kernel: "gaussian".into(), alpha: 0.05 }
    }
}

#[derive(Debug, Clone)]
pub struct QrFit {
    pub tau: f64,
    pub beta: DVector<f64>,
    /// `None` when the kernel Hessian was singular.
    pub covariance: Option<DMatrix<f64>>,
    /// `None` without an intercept column.
    pub pseudo_r2: Option<f64>,
    pub objective: f64,
    pub residuals: Vec<f64>,
    pub basis: Vec<usize>,
    /// Optimality not certified at a heavily tied vertex.
    pub degenerate: bool,
}

impl QrFit {
    pub fn std_errors(&self) -> Option<Vec<f64>> {
        self.covariance.as_ref().map(|c| (0..c.nrows()).map(|i| c[(i, i)].max(0.0).sqrt()).collect())
    }
}

fn intercept_column(x: &DMatrix<f64>) -> Option<usize> {
    (0..x.ncols()).find(|&j| x.column(j).iter().all(|v| *v == 1.0))
}

/// Koenker-Machado goodness of fit `1 - V(full) / V(intercept only)`.
pub fn pseudo_r_squared(full_objective: f64, y: &[f64], x: &DMatrix<f64>, tau: f64) -> Result<f64> {
    intercept_column(x).ok_or(QrError::NoIntercept)?;
    let mut sorted = y.to_vec();
    sorted.sort_by(f64::total_cmp);
    // intercept-only minimiser is an order statistic
    let k = ((tau * y.len() as f64).ceil() as usize).clamp(1, y.len()) - 1;
    let q = sorted[k];
    let restricted: f64 = y.iter().map(|v| check_loss(v - q, tau)).sum();
    if restricted <= 0.0 {
        return Ok(if full_objective <= 0.0 { 1.0 } else { 0.0 });
    }
    Ok((1.0 - full_objective / restricted).clamp(0.0, 1.0))
}

/// Fits `Q_y(tau | x) = x' beta` and attaches covariance and pseudo-R².
pub fn fit_qr(y: &[f64], x: &DMatrix<f64>, tau: f64, options: &QrOptions) -> Result<QrFit> {
    let rule = bandwidth_rule(&options.bandwidth)
        .ok_or_else(|| QrError::Unknown { kind: "bandwidth rule", name: options.bandwidth.clone() })?;
    let kern =
        kernel(&options.kernel).ok_or_else(|| QrError::Unknown { kind: "kernel", name: options.kernel.clone() })?;
    let sol = solve(y, x, tau)?;
    let fitted = x * &sol.beta;
    let mut residuals: Vec<f64> = y.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect();
    for &i in &sol.basis {
        residuals[i] = 0.0;
    }
    let covariance = rule
        .bandwidth(y.len(), tau, options.alpha)
        .ok()
        .map(|h| residual_bandwidth(&residuals, tau, h))
        .and_then(|b| powell_covariance(&residuals, x, tau, b, kern.as_ref()).ok());
    let pseudo_r2 = pseudo_r_squared(sol.objective, y, x, tau).ok();
    Ok(QrFit {
        tau,
        beta: sol.beta,
        covariance,
        pseudo_r2,
        objective: sol.objective,
        residuals,
        basis: sol.basis,
        degenerate: sol.degenerate,
    })
}
