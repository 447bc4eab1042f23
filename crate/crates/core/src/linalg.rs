//! Least-squares helpers shared by the diagnostics and regression modules.

use nalgebra::{DMatrix, DVector};

/// Returned when `X'X` is not numerically positive definite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Singular;

#[derive(Debug, Clone)]
pub struct OlsFit {
    pub beta: DVector<f64>,
    pub residuals: DVector<f64>,
    pub ssr: f64,
    /// `(X'X)^{-1}`
    pub xtx_inv: DMatrix<f64>,
}

impl OlsFit {
    pub fn nobs(&self) -> usize {
        self.residuals.len()
    }

    /// Residual variance with `n - p` degrees of freedom.
    pub fn sigma2(&self) -> f64 {
        let dof = self.nobs().saturating_sub(self.beta.len()).max(1);
        self.ssr / dof as f64
    }

    pub fn std_errors(&self) -> DVector<f64> {
        let s2 = self.sigma2();
        DVector::from_iterator(self.beta.len(), (0..self.beta.len()).map(|j| (s2 * self.xtx_inv[(j, j)]).sqrt()))
    }
}

/// Inverse of a symmetric positive definite matrix, with a scale-free rank check.
pub fn spd_inverse(a: &DMatrix<f64>) -> Result<DMatrix<f64>, Singular> {
    let p = a.nrows();
    let mut scale = DVector::zeros(p);
    for j in 0..p {
        let d = a[(j, j)];
        if !(d > 0.0) || !d.is_finite() {
            return Err(Singular);
        }
        scale[j] = 1.0 / d.sqrt();
    }
    let scaled = DMatrix::from_fn(p, p, |i, j| a[(i, j)] * scale[i] * scale[j]);
    let chol = scaled.cholesky().ok_or(Singular)?;
    let l = chol.l();
    let min_pivot = (0..p).map(|j| l[(j, j)]).fold(f64::INFINITY, f64::min);
    if min_pivot < 1e-7 {
        return Err(Singular);
    }
    let inv = chol.inverse();
    Ok(DMatrix::from_fn(p, p, |i, j| inv[(i, j)] * scale[i] * scale[j]))
}

pub fn ols(y: &[f64], x: &DMatrix<f64>) -> Result<OlsFit, Singular> {
    assert_eq!(y.len(), x.nrows(), "design rows must match observations");
    let yv = DVector::from_column_slice(y);
    let xtx = x.tr_mul(x);
    let xtx_inv = spd_inverse(&xtx)?;
    let beta = &xtx_inv * x.tr_mul(&yv);
    let residuals = &yv - x * &beta;
    let ssr = residuals.norm_squared();
    Ok(OlsFit { beta, residuals, ssr, xtx_inv })
}

/// Centered R² of a fit whose design includes an intercept.
pub fn r_squared(y: &[f64], ssr: f64) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    if tss == 0.0 {
        return 0.0;
    }
    1.0 - ssr / tss
}

/// Builds an `n x p` design from column slices.
pub fn design(columns: &[&[f64]]) -> DMatrix<f64> {
    let n = columns.first().map_or(0, |c| c.len());
    DMatrix::from_fn(n, columns.len(), |i, j| columns[j][i])
}

/// Prepends an intercept column.
pub fn with_intercept(x: &DMatrix<f64>) -> DMatrix<f64> {
    x.clone().insert_column(0, 1.0)
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance with `n - 1` denominator.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}
