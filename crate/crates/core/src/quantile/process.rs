//! Coefficient paths across a grid of quantiles.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{fit_qr, QrError, QrFit, QrOptions, Result};
use crate::report::{num, Table};

/// `0.05, 0.10, ..., 0.95`.
pub fn default_taus() -> Vec<f64> {
    (1..=19).map(|k| k as f64 * 0.05).collect()
}

#[derive(Debug, Clone)]
pub struct QuantileProcess {
    pub taus: Vec<f64>,
    pub names: Vec<String>,
    /// One entry per tau; a failed quantile is kept as its error.
    pub fits: Vec<std::result::Result<QrFit, QrError>>,
    /// Two-sided level of the pointwise bands.
    pub band_level: f64,
}

/// Point estimate with its pointwise band at one quantile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPoint {
    pub tau: f64,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
}

pub fn quantile_process(
    y: &[f64],
    x: &DMatrix<f64>,
    names: &[String],
    taus: &[f64],
    options: &QrOptions,
) -> Result<QuantileProcess> {
    if taus.is_empty() {
        return Err(QrError::InvalidInput("empty quantile grid".into()));
    }
    if let Some(bad) = taus.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
        return Err(QrError::InvalidTau(*bad));
    }
    if taus.windows(2).any(|w| w[1] <= w[0]) {
        return Err(QrError::InvalidInput("quantile grid must be strictly increasing".into()));
    }
    if names.len() != x.ncols() {
        return Err(QrError::InvalidInput("one name per column of X".into()));
    }
    let fits = taus.par_iter().map(|&tau| fit_qr(y, x, tau, options)).collect();
    Ok(QuantileProcess { taus: taus.to_vec(), names: names.to_vec(), fits, band_level: 0.95 })
}

impl QuantileProcess {
    fn z(&self) -> f64 {
        use statrs::distribution::{ContinuousCDF, Normal};
        Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(0.5 + self.band_level / 2.0)
    }

    /// Path of coefficient `j` over the successful quantiles.
    pub fn path(&self, j: usize) -> Vec<PathPoint> {
        let z = self.z();
        self.fits
            .iter()
            .filter_map(|f| f.as_ref().ok())
            .map(|f| {
                let se = f.std_errors().map_or(f64::NAN, |s| s[j]);
                PathPoint { tau: f.tau, estimate: f.beta[j], lower: f.beta[j] - z * se, upper: f.beta[j] + z * se }
            })
            .collect()
    }

    pub fn failures(&self) -> Vec<(f64, &QrError)> {
        self.taus.iter().zip(&self.fits).filter_map(|(t, f)| f.as_ref().err().map(|e| (*t, e))).collect()
    }

    /// Count of (adjacent quantile pair, observation) where fitted quantiles cross.
    pub fn crossings(&self, x: &DMatrix<f64>) -> usize {
        let fitted: Vec<_> = self.fits.iter().filter_map(|f| f.as_ref().ok()).map(|f| x * &f.beta).collect();
        fitted.windows(2).map(|w| w[0].iter().zip(w[1].iter()).filter(|(lo, hi)| lo > hi).count()).sum()
    }

    /// Long format: tau, coefficient, estimate, lower, upper, pseudo_r2.
    pub fn long_table(&self) -> Table {
        let mut t = Table::new(["tau", "coefficient", "estimate", "lower", "upper", "pseudo_r2"]);
        let z = self.z();
        for f in self.fits.iter().filter_map(|f| f.as_ref().ok()) {
            let se = f.std_errors();
            for (j, name) in self.names.iter().enumerate() {
                let s = se.as_ref().map_or(f64::NAN, |s| s[j]);
                t.push([
                    format!("{:.4}", f.tau),
                    name.clone(),
                    num(f.beta[j]),
                    num(f.beta[j] - z * s),
                    num(f.beta[j] + z * s),
                    num(f.pseudo_r2.unwrap_or(f64::NAN)),
                ]);
            }
        }
        t
    }
}
