//! Quasi-Newton minimisation with finite-difference derivatives.
//!
//! Objectives are plain closures over an unconstrained parameter vector.
//! Infeasible points are signalled by returning `+inf` (or NaN); the line
//! search treats them as "step too long" and backtracks.

use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bfgs {
    pub max_iter: usize,
    /// Converged when the largest parameter change is below this...
    pub xtol: f64,
    /// ...and the objective change is below this.
    pub ftol: f64,
    /// Also converged when the largest gradient component is below `gtol * (1 + |f|)`.
    pub gtol: f64,
}

impl Default for Bfgs {
    fn default() -> Self {
        Self { max_iter: 2000, xtol: 1e-6, ftol: 1e-8, gtol: 1e-9 }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

fn fd_step(x: f64) -> f64 {
    6e-6 * x.abs().max(1.0)
}

/// Central-difference gradient. Falls back to a one-sided difference when
/// one side of the stencil is infeasible.
pub fn gradient<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], fx: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let h = fd_step(x[i]);
            xp[i] = x[i] + h;
            let fp = f(&xp);
            xp[i] = x[i] - h;
            let fm = f(&xp);
            xp[i] = x[i];
            match (fp.is_finite(), fm.is_finite()) {
                (true, true) => (fp - fm) / (2.0 * h),
                (true, false) => (fp - fx) / h,
                (false, true) => (fx - fm) / h,
                (false, false) => 0.0,
            }
        })
        .collect()
}

/// Central-difference Hessian.
pub fn hessian<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let h: Vec<f64> = x.iter().map(|v| 1e-4 * v.abs().max(1.0)).collect();
    let f0 = f(x);
    let mut xp = x.to_vec();
    let mut hess = DMatrix::zeros(n, n);
    for i in 0..n {
        xp[i] = x[i] + 2.0 * h[i];
        let fpp = f(&xp);
        xp[i] = x[i] - 2.0 * h[i];
        let fmm = f(&xp);
        xp[i] = x[i];
        hess[(i, i)] = (fpp - 2.0 * f0 + fmm) / (4.0 * h[i] * h[i]);
        for j in 0..i {
            let mut eval = |si: f64, sj: f64| {
                xp[i] = x[i] + si * h[i];
                xp[j] = x[j] + sj * h[j];
                let v = f(&xp);
                xp[i] = x[i];
                xp[j] = x[j];
                v
            };
            let v = (eval(1.0, 1.0) - eval(1.0, -1.0) - eval(-1.0, 1.0) + eval(-1.0, -1.0))
                / (4.0 * h[i] * h[j]);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    hess
}

/// Central-difference Jacobian of a vector map, `rows = outputs`.
pub fn jacobian<G: Fn(&[f64]) -> Vec<f64>>(g: &G, x: &[f64]) -> DMatrix<f64> {
    let m = g(x).len();
    let mut jac = DMatrix::zeros(m, x.len());
    let mut xp = x.to_vec();
    for j in 0..x.len() {
        let h = fd_step(x[j]);
        xp[j] = x[j] + h;
        let gp = g(&xp);
        xp[j] = x[j] - h;
        let gm = g(&xp);
        xp[j] = x[j];
        for i in 0..m {
            jac[(i, j)] = (gp[i] - gm[i]) / (2.0 * h);
        }
    }
    jac
}

impl Bfgs {
    pub fn minimize<F: Fn(&[f64]) -> f64>(&self, f: F, x0: &[f64]) -> Minimum {
        let n = x0.len();
        let mut evals = 0usize;
        let counted = |x: &[f64], evals: &mut usize| {
            *evals += 1;
            let v = f(x);
            if v.is_nan() { f64::INFINITY } else { v }
        };

        let mut x = DVector::from_column_slice(x0);
        let mut fx = counted(x.as_slice(), &mut evals);
        if !fx.is_finite() {
            return Minimum { x: x0.to_vec(), f: fx, iterations: 0, evaluations: evals, converged: false };
        }
        let mut g = DVector::from_vec(gradient(&f, x.as_slice(), fx));
        evals += 2 * n;
        let mut inv_h = DMatrix::<f64>::identity(n, n);
        let mut restarted = false;

        for iter in 0..self.max_iter {
            let gmax = g.amax();
            if gmax <= self.gtol * (1.0 + fx.abs()) {
                return Minimum { x: x.data.into(), f: fx, iterations: iter, evaluations: evals, converged: true };
            }
            let mut dir = -(&inv_h * &g);
            let mut slope = g.dot(&dir);
            if !(slope < 0.0) {
                inv_h = DMatrix::identity(n, n);
                dir = -g.clone();
                slope = g.dot(&dir);
            }
            // Keep the first trial step modest when the metric is still the identity.
            let dnorm = dir.amax();
            let mut step = if dnorm > 1.0 && inv_h.is_identity(0.0) { 1.0 / dnorm } else { 1.0 };

            let mut accepted = None;
            for _ in 0..60 {
                let trial = &x + step * &dir;
                let ft = counted(trial.as_slice(), &mut evals);
                if ft.is_finite() && ft <= fx + 1e-4 * step * slope {
                    accepted = Some((trial, ft));
                    break;
                }
                step *= if ft.is_finite() { 0.5 } else { 0.2 };
            }

            let Some((x_new, f_new)) = accepted else {
                if !restarted {
                    restarted = true;
                    inv_h = DMatrix::identity(n, n);
                    continue;
                }
                let converged = gmax <= 1e-3 * (1.0 + fx.abs());
                return Minimum { x: x.data.into(), f: fx, iterations: iter, evaluations: evals, converged };
            };
            restarted = false;

            let g_new = DVector::from_vec(gradient(&f, x_new.as_slice(), f_new));
            evals += 2 * n;
            let s = &x_new - &x;
            let y = &g_new - &g;
            let sy = s.dot(&y);
            if sy > 1e-12 * s.norm() * y.norm() {
                if iter == 0 {
                    inv_h *= sy / y.norm_squared();
                }
                let rho = 1.0 / sy;
                let hy = &inv_h * &y;
                let yhy = y.dot(&hy);
                inv_h += (rho * rho * yhy + rho) * (&s * s.transpose())
                    - rho * (&hy * s.transpose() + &s * hy.transpose());
            }

            let dx = s.amax();
            let df = (fx - f_new).abs();
            x = x_new;
            fx = f_new;
            g = g_new;
            if dx < self.xtol && df < self.ftol {
                return Minimum { x: x.data.into(), f: fx, iterations: iter + 1, evaluations: evals, converged: true };
            }
        }
        Minimum { x: x.data.into(), f: fx, iterations: self.max_iter, evaluations: evals, converged: false }
    }
}

/// Covariance from the inverse Hessian of a negative log-likelihood, mapped
/// to natural parameters through the Jacobian of `to_natural`.
pub fn delta_method_covariance<G: Fn(&[f64]) -> Vec<f64>>(
    hess: &DMatrix<f64>,
    to_natural: &G,
    x: &[f64],
) -> Option<DMatrix<f64>> {
    let inv = symmetric_inverse(hess)?;
    let jac = jacobian(to_natural, x);
    let cov = &jac * inv * jac.transpose();
    Some((&cov + cov.transpose()) * 0.5)
}

/// Inverse of a symmetric matrix that must be positive definite.
pub fn symmetric_inverse(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let sym = (a + a.transpose()) * 0.5;
    crate::linalg::spd_inverse(&sym).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn minimizes_rosenbrock() {
        let m = Bfgs::default().minimize(rosenbrock, &[-1.2, 1.0]);
        assert!(m.converged, "{m:?}");
        assert!((m.x[0] - 1.0).abs() < 1e-4 && (m.x[1] - 1.0).abs() < 1e-4, "{m:?}");
    }

    #[test]
    fn respects_infeasible_region() {
        // log barrier: infeasible for x <= 0
        let f = |x: &[f64]| if x[0] <= 0.0 { f64::INFINITY } else { x[0] - 2.0 * x[0].ln() };
        let m = Bfgs::default().minimize(f, &[0.1]);
        assert!((m.x[0] - 2.0).abs() < 1e-6, "{m:?}");
    }

    #[test]
    fn quadratic_hessian_is_exact() {
        let f = |x: &[f64]| 3.0 * x[0] * x[0] + 2.0 * x[0] * x[1] + 5.0 * x[1] * x[1];
        let h = hessian(&f, &[0.3, -0.7]);
        assert!((h[(0, 0)] - 6.0).abs() < 1e-5);
        assert!((h[(0, 1)] - 2.0).abs() < 1e-5);
        assert!((h[(1, 1)] - 10.0).abs() < 1e-5);
    }
}
