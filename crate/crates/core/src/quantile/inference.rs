//! Bandwidth rules, kernels and the Powell sandwich covariance.

use nalgebra::DMatrix;
use statrs::distribution::{ContinuousCDF, Normal};

use super::{QrError, Result};
use crate::linalg::spd_inverse;

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Keeps `tau +- h` inside (0, 1).
fn clamp(h: f64, tau: f64) -> f64 {
    h.min(0.999 * tau.min(1.0 - tau))
}

/// A bandwidth rule on the probability scale.
pub trait BandwidthRule: Send + Sync {
    fn name(&self) -> &'static str;
    fn bandwidth(&self, n: usize, tau: f64, alpha: f64) -> Result<f64>;
}

pub struct HallSheather;
pub struct Bofinger;
pub struct Chamberlain;

fn check(n: usize, tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(QrError::InvalidTau(tau));
    }
    if n < 10 {
        return Err(QrError::TooSmallSample(n));
    }
    Ok(())
}

impl BandwidthRule for HallSheather {
    fn name(&self) -> &'static str {
        "hall-sheather"
    }

    fn bandwidth(&self, n: usize, tau: f64, alpha: f64) -> Result<f64> {
        hall_sheather_bandwidth(n, tau, alpha)
    }
}

impl BandwidthRule for Bofinger {
    fn name(&self) -> &'static str {
        "bofinger"
    }

    fn bandwidth(&self, n: usize, tau: f64, _alpha: f64) -> Result<f64> {
        check(n, tau)?;
        let q = std_normal().inverse_cdf(tau);
        let h = (n as f64).powf(-0.2) * (4.5 * phi(q).powi(4) / (2.0 * q * q + 1.0).powi(2)).powf(0.2);
        Ok(clamp(h, tau))
    }
}

impl BandwidthRule for Chamberlain {
    fn name(&self) -> &'static str {
        "chamberlain"
    }

    fn bandwidth(&self, n: usize, tau: f64, alpha: f64) -> Result<f64> {
        check(n, tau)?;
        let z = std_normal().inverse_cdf(1.0 - alpha / 2.0);
        Ok(clamp(z * (tau * (1.0 - tau) / n as f64).sqrt(), tau))
    }
}

pub fn hall_sheather_bandwidth(n: usize, tau: f64, alpha: f64) -> Result<f64> {
    check(n, tau)?;
    let normal = std_normal();
    let q = normal.inverse_cdf(tau);
    let z = normal.inverse_cdf(1.0 - alpha / 2.0);
    let h = (n as f64).powf(-1.0 / 3.0)
        * z.powf(2.0 / 3.0)
        * (1.5 * phi(q).powi(2) / (2.0 * q * q + 1.0)).powf(1.0 / 3.0);
    Ok(clamp(h, tau))
}

/// Registered bandwidth rules; the first is the default.
pub fn bandwidth_rules() -> Vec<Box<dyn BandwidthRule>> {
    vec![Box::new(HallSheather), Box::new(Bofinger), Box::new(Chamberlain)]
}

pub fn bandwidth_rule(name: &str) -> Option<Box<dyn BandwidthRule>> {
    let name = if name == "koenker-ng" { "bofinger" } else { name };
    bandwidth_rules().into_iter().find(|r| r.name() == name)
}

/// A density kernel integrating to one.
pub trait Kernel: Send + Sync {
    fn name(&self) -> &'static str;
    fn density(&self, u: f64) -> f64;
}

pub struct Gaussian;
pub struct Epanechnikov;

impl Kernel for Gaussian {
    fn name(&self) -> &'static str {
        "gaussian"
    }

    fn density(&self, u: f64) -> f64 {
        phi(u)
    }
}

impl Kernel for Epanechnikov {
    fn name(&self) -> &'static str {
        "epanechnikov"
    }

    fn density(&self, u: f64) -> f64 {
        if u.abs() < 1.0 { 0.75 * (1.0 - u * u) } else { 0.0 }
    }
}

pub fn kernels() -> Vec<Box<dyn Kernel>> {
    vec![Box::new(Gaussian), Box::new(Epanechnikov)]
}

pub fn kernel(name: &str) -> Option<Box<dyn Kernel>> {
    kernels().into_iter().find(|k| k.name() == name)
}

/// Converts a probability-scale bandwidth into residual units:
/// `kappa * (Phi^{-1}(tau + h) - Phi^{-1}(tau - h))`, `kappa = min(sd, IQR / 1.34)`.
pub fn residual_bandwidth(residuals: &[f64], tau: f64, h: f64) -> f64 {
    let n = residuals.len() as f64;
    let mean = residuals.iter().sum::<f64>() / n;
    let sd = (residuals.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let mut sorted = residuals.to_vec();
    sorted.sort_by(f64::total_cmp);
    let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
    let kappa = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    let normal = std_normal();
    kappa * (normal.inverse_cdf(tau + h) - normal.inverse_cdf(tau - h))
}

/// Linear-interpolation sample quantile of sorted data.
pub(crate) fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// `tau (1 - tau) H^{-1} (X'X / n) H^{-1} / n` with
/// `H = (1/n) sum K(u_i / b) / b * x_i x_i'` for residual-scale bandwidth `b`.
pub fn powell_covariance(
    residuals: &[f64],
    x: &DMatrix<f64>,
    tau: f64,
    bandwidth: f64,
    kernel: &dyn Kernel,
) -> Result<DMatrix<f64>> {
    if !(bandwidth > 0.0) || !bandwidth.is_finite() {
        return Err(QrError::SingularH);
    }
    let (n, p) = x.shape();
    let nf = n as f64;
    let mut h = DMatrix::<f64>::zeros(p, p);
    for i in 0..n {
        let w = kernel.density(residuals[i] / bandwidth) / bandwidth;
        if w == 0.0 {
            continue;
        }
        let xi = x.row(i);
        for a in 0..p {
            for b in 0..=a {
                h[(a, b)] += w * xi[a] * xi[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            h[(b, a)] = h[(a, b)];
        }
    }
    h /= nf;
    let h_inv = spd_inverse(&h).map_err(|_| QrError::SingularH)?;
    let gram = x.tr_mul(x) / nf;
    let cov = &h_inv * gram * &h_inv * (tau * (1.0 - tau) / nf);
    Ok((&cov + cov.transpose()) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hall_sheather_closed_form_at_median() {
        let n = 1000.0f64;
        let z = 1.959_963_984_540_054f64;
        let expected = n.powf(-1.0 / 3.0) * z.powf(2.0 / 3.0) * (1.5 / (2.0 * std::f64::consts::PI)).powf(1.0 / 3.0);
        let h = hall_sheather_bandwidth(1000, 0.5, 0.05).unwrap();
        assert!((h - expected).abs() < 1e-10, "{h} vs {expected}");
    }

    #[test]
    fn bandwidth_shrinks_and_clamps() {
        assert!(hall_sheather_bandwidth(1_000_000, 0.5, 0.05).unwrap() < hall_sheather_bandwidth(100, 0.5, 0.05).unwrap());
        let h = hall_sheather_bandwidth(10, 0.99, 0.05).unwrap();
        assert!(0.99 + h < 1.0 && 0.99 - h > 0.0);
        assert_eq!(hall_sheather_bandwidth(9, 0.5, 0.05), Err(QrError::TooSmallSample(9)));
    }

    #[test]
    fn registries_resolve_by_name() {
        assert_eq!(bandwidth_rule("hall-sheather").unwrap().name(), "hall-sheather");
        assert_eq!(bandwidth_rule("koenker-ng").unwrap().name(), "bofinger");
        assert!(bandwidth_rule("nope").is_none());
        assert_eq!(kernel("epanechnikov").unwrap().density(0.0), 0.75);
    }

    #[test]
    fn kernels_integrate_to_one() {
        for k in kernels() {
            let step = 1e-3;
            let total: f64 = (-8000..8000).map(|i| k.density((i as f64 + 0.5) * step) * step).sum();
            assert!((total - 1.0).abs() < 1e-6, "{}", k.name());
        }
    }
}
