//! Engle's LM test for ARCH effects.

use nalgebra::DMatrix;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::{DiagnosticsError, Result};
use crate::linalg::{ols, r_squared};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArchLmResult {
    pub lm_statistic: f64,
    pub lags: usize,
    pub p_value: f64,
}

/// Regresses squared residuals on a constant and `lags` of themselves;
/// `LM = n R²` against chi-square(`lags`).
pub fn arch_lm(residuals: &[f64], lags: usize) -> Result<ArchLmResult> {
    let n = residuals.len();
    if lags == 0 {
        return Err(DiagnosticsError::InvalidInput("lags must be at least 1".into()));
    }
    if n <= lags + 10 {
        return Err(DiagnosticsError::TooShort { needed: lags + 11, got: n });
    }
    let sq: Vec<f64> = residuals.iter().map(|e| e * e).collect();
    let target = &sq[lags..];
    let first = target[0];
    if target.iter().all(|v| *v == first) {
        return Ok(ArchLmResult { lm_statistic: 0.0, lags, p_value: 1.0 });
    }
    let rows = n - lags;
    let x = DMatrix::from_fn(rows, lags + 1, |r, c| if c == 0 { 1.0 } else { sq[lags + r - c] });
    let fit = ols(target, &x).map_err(|_| DiagnosticsError::SingularRegression)?;
    let lm = (rows as f64 * r_squared(target, fit.ssr)).max(0.0);
    let chi = ChiSquared::new(lags as f64).expect("positive degrees of freedom");
    let p_value = (1.0 - chi.cdf(lm)).clamp(0.0, 1.0);
    Ok(ArchLmResult { lm_statistic: lm, lags, p_value })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_residuals_are_degenerate() {
        let r = arch_lm(&[0.0; 50], 5).unwrap();
        assert_eq!(r.lm_statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn scale_invariant() {
        let e: Vec<f64> = (0..200).map(|i| ((i * 37 % 101) as f64 - 50.0) / 17.0).collect();
        let scaled: Vec<f64> = e.iter().map(|v| -3.5 * v).collect();
        let a = arch_lm(&e, 4).unwrap();
        let b = arch_lm(&scaled, 4).unwrap();
        assert!((a.lm_statistic - b.lm_statistic).abs() < 1e-8 * a.lm_statistic.max(1.0));
    }

    #[test]
    fn too_short() {
        assert!(matches!(arch_lm(&[1.0; 12], 5), Err(DiagnosticsError::TooShort { .. })));
    }
}
