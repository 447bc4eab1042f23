//! Variance inflation factors.

use super::{DiagnosticsError, Result};
use crate::linalg::{design, ols, r_squared, with_intercept};

/// `VIF_j = 1 / (1 - R²_j)` from regressing column `j` on the others and an
/// intercept. Perfectly collinear columns get `+inf`.
pub fn vif(columns: &[(String, Vec<f64>)]) -> Result<Vec<(String, f64)>> {
    if columns.len() < 2 {
        return Err(DiagnosticsError::InvalidInput("VIF needs at least two columns".into()));
    }
    let n = columns[0].1.len();
    if columns.iter().any(|(_, c)| c.len() != n) {
        return Err(DiagnosticsError::InvalidInput("columns differ in length".into()));
    }
    for (name, c) in columns {
        if c.iter().all(|v| *v == c[0]) {
            return Err(DiagnosticsError::ConstantColumn(name.clone()));
        }
    }
    let out = (0..columns.len())
        .map(|j| {
            let others: Vec<&[f64]> =
                columns.iter().enumerate().filter(|(i, _)| *i != j).map(|(_, (_, c))| c.as_slice()).collect();
            let x = with_intercept(&design(&others));
            let y = &columns[j].1;
            let value = match ols(y, &x) {
                Ok(fit) => {
                    let r2 = r_squared(y, fit.ssr);
                    if r2 >= 1.0 - 1e-12 { f64::INFINITY } else { (1.0 / (1.0 - r2)).max(1.0) }
                }
                Err(_) => f64::INFINITY,
            };
            (columns[j].0.clone(), value)
        })
        .collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(name: &str, v: Vec<f64>) -> (String, Vec<f64>) {
        (name.to_string(), v)
    }

    #[test]
    fn orthogonal_columns_have_unit_vif() {
        let a = vec![1.0, -1.0, 1.0, -1.0];
        let b = vec![1.0, 1.0, -1.0, -1.0];
        for (_, v) in vif(&[col("a", a), col("b", b)]).unwrap() {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn duplicated_column_is_infinite() {
        let a = vec![1.0, 2.0, 4.0, 3.0, 7.0];
        let out = vif(&[col("a", a.clone()), col("b", a)]).unwrap();
        assert!(out.iter().all(|(_, v)| v.is_infinite()));
    }

    #[test]
    fn constant_column_rejected() {
        let err = vif(&[col("a", vec![1.0, 2.0, 3.0]), col("c", vec![2.0; 3])]).unwrap_err();
        assert_eq!(err, DiagnosticsError::ConstantColumn("c".into()));
    }

    #[test]
    fn rescaling_leaves_vif_unchanged() {
        let a: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        let b: Vec<f64> = (0..50).map(|i| (i as f64 * 0.7).cos() + 0.3 * (i as f64).sin()).collect();
        let c: Vec<f64> = (0..50).map(|i| (i as f64 * 1.3).sin()).collect();
        let base = vif(&[col("a", a.clone()), col("b", b.clone()), col("c", c.clone())]).unwrap();
        let scaled =
            vif(&[col("a", a.iter().map(|v| v * 1e3).collect()), col("b", b), col("c", c.iter().map(|v| v * 0.01).collect())])
                .unwrap();
        for ((_, x), (_, y)) in base.iter().zip(&scaled) {
            assert!(*x >= 1.0);
            assert!((x - y).abs() < 1e-9 * x);
        }
    }
}
