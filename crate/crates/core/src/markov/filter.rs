//! Transition matrices, the Hamilton filter and the Kim smoother.

use nalgebra::DMatrix;

use super::{MarkovError, Result};

/// Row-stochastic matrix, `p[(i, j)] = Pr(s_t = j | s_{t-1} = i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    p: DMatrix<f64>,
}

impl TransitionMatrix {
    pub fn new(p: DMatrix<f64>) -> Result<Self> {
        if p.nrows() != p.ncols() || p.nrows() < 2 {
            return Err(MarkovError::InvalidSpec("transition matrix must be square with M >= 2".into()));
        }
        for i in 0..p.nrows() {
            let row = p.row(i);
            if row.iter().any(|v| !(0.0..=1.0).contains(v)) || (row.sum() - 1.0).abs() > 1e-12 {
                return Err(MarkovError::InvalidProbabilities(format!("row {i} is not a probability vector")));
            }
        }
        Ok(Self { p })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let m = rows.len();
        Self::new(DMatrix::from_fn(m, m, |i, j| rows[i].get(j).copied().unwrap_or(f64::NAN)))
    }

    pub fn regimes(&self) -> usize {
        self.p.nrows()
    }

    pub fn get(&self, from: usize, to: usize) -> f64 {
        self.p[(from, to)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    /// Stationary distribution, solving `pi' (I - P) = 0` with `sum(pi) = 1`.
    /// Falls back to uniform when the chain has no unique one.
    pub fn ergodic(&self) -> Vec<f64> {
        let m = self.regimes();
        let mut a = DMatrix::<f64>::zeros(m + 1, m);
        for i in 0..m {
            for j in 0..m {
                a[(i, j)] = if i == j { 1.0 } else { 0.0 } - self.p[(j, i)];
            }
        }
        for j in 0..m {
            a[(m, j)] = 1.0;
        }
        let mut b = nalgebra::DVector::<f64>::zeros(m + 1);
        b[m] = 1.0;
        let ata = a.tr_mul(&a);
        let pi = ata.clone().lu().solve(&a.tr_mul(&b));
        match pi {
            Some(pi) if pi.iter().all(|v| v.is_finite() && *v >= -1e-10) && ata.determinant().abs() > 1e-14 => {
                let clipped: Vec<f64> = pi.iter().map(|v| v.max(0.0)).collect();
                let s: f64 = clipped.iter().sum();
                clipped.iter().map(|v| v / s).collect()
            }
            _ => vec![1.0 / m as f64; m],
        }
    }
}

/// Logit coefficients of time-varying transitions. For origin regime `i` and
/// destination `j < M - 1`, `coef(i, j)` has `1 + n_covariates` entries (the
/// first multiplies a constant); the last destination is the reference with
/// all-zero coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionCoefs {
    regimes: usize,
    n_covariates: usize,
    values: Vec<f64>,
}

impl TransitionCoefs {
    pub fn zeros(regimes: usize, n_covariates: usize) -> Self {
        Self { regimes, n_covariates, values: vec![0.0; regimes * (regimes - 1) * (1 + n_covariates)] }
    }

    pub fn from_values(regimes: usize, n_covariates: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != regimes * (regimes - 1) * (1 + n_covariates) {
            return Err(MarkovError::InvalidSpec("transition coefficient count does not match M and E".into()));
        }
        Ok(Self { regimes, n_covariates, values })
    }

    /// Constant transitions reproducing `p`. Zero entries map to logits of
    /// -1000, which the softmax turns back into exact zeros.
    pub fn from_matrix(p: &TransitionMatrix, n_covariates: usize) -> Self {
        const CAP: f64 = 1000.0;
        let m = p.regimes();
        let mut c = Self::zeros(m, n_covariates);
        for i in 0..m {
            for j in 0..m - 1 {
                let v = (p.get(i, j) / p.get(i, m - 1)).ln();
                c.coef_mut(i, j)[0] = if v.is_nan() { -CAP } else { v.clamp(-CAP, CAP) };
            }
        }
        c
    }

    pub fn regimes(&self) -> usize {
        self.regimes
    }

    pub fn n_covariates(&self) -> usize {
        self.n_covariates
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn offset(&self, from: usize, to: usize) -> usize {
        (from * (self.regimes - 1) + to) * (1 + self.n_covariates)
    }

    pub fn coef(&self, from: usize, to: usize) -> &[f64] {
        let o = self.offset(from, to);
        &self.values[o..o + 1 + self.n_covariates]
    }

    pub fn coef_mut(&mut self, from: usize, to: usize) -> &mut [f64] {
        let o = self.offset(from, to);
        let w = 1 + self.n_covariates;
        &mut self.values[o..o + w]
    }

    /// Same chain with regimes renamed: new regime `k` is old regime `order[k]`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        let m = self.regimes;
        let w = 1 + self.n_covariates;
        let old = |i: usize, j: usize, c: usize| if j == m - 1 { 0.0 } else { self.coef(i, j)[c] };
        let mut out = Self::zeros(m, self.n_covariates);
        for i in 0..m {
            for j in 0..m - 1 {
                for c in 0..w {
                    out.coef_mut(i, j)[c] = old(order[i], order[j], c) - old(order[i], order[m - 1], c);
                }
            }
        }
        out
    }
}

/// Multinomial-logit transition matrix for covariates `e` (constant excluded).
pub fn transition_logit(e: &[f64], coefs: &TransitionCoefs) -> TransitionMatrix {
    let m = coefs.regimes();
    assert_eq!(e.len(), coefs.n_covariates(), "covariate count must match coefficients");
    let mut p = DMatrix::<f64>::zeros(m, m);
    let mut z = vec![0.0; m];
    for i in 0..m {
        for (j, zj) in z.iter_mut().enumerate().take(m - 1) {
            let c = coefs.coef(i, j);
            *zj = c[0] + c[1..].iter().zip(e).map(|(a, b)| a * b).sum::<f64>();
        }
        z[m - 1] = 0.0;
        let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = z.iter().map(|v| (v - max).exp()).sum();
        for j in 0..m {
            p[(i, j)] = (z[j] - max).exp() / s;
        }
    }
    TransitionMatrix { p }
}

/// `1 / (1 - p_ii)`; `+inf` for an absorbing regime.
pub fn expected_durations(p: &TransitionMatrix) -> Vec<f64> {
    (0..p.regimes())
        .map(|i| {
            let stay = p.get(i, i);
            if stay >= 1.0 { f64::INFINITY } else { 1.0 / (1.0 - stay) }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct FilterOutput {
    /// `xi_{t|t-1}`, T x M.
    pub predicted: DMatrix<f64>,
    /// `xi_{t|t}`, T x M.
    pub filtered: DMatrix<f64>,
    pub loglik: f64,
}

/// Forward recursion on per-regime log densities (T x M). `transition(t)` is
/// the matrix governing the move into period `t >= 1`; `initial` is the prior
/// for the first period.
pub fn hamilton_filter_core<F>(log_density: &DMatrix<f64>, transition: F, initial: &[f64]) -> Result<FilterOutput>
where
    F: Fn(usize) -> TransitionMatrix,
{
    let (t_len, m) = log_density.shape();
    if initial.len() != m {
        return Err(MarkovError::InvalidSpec("initial distribution has the wrong length".into()));
    }
    let mut predicted = DMatrix::<f64>::zeros(t_len, m);
    let mut filtered = DMatrix::<f64>::zeros(t_len, m);
    let mut loglik = 0.0;
    let mut lp = vec![0.0; m];
    for t in 0..t_len {
        if t == 0 {
            for j in 0..m {
                predicted[(0, j)] = initial[j];
            }
        } else {
            let p = transition(t);
            for j in 0..m {
                predicted[(t, j)] = (0..m).map(|i| p.get(i, j) * filtered[(t - 1, i)]).sum();
            }
        }
        for j in 0..m {
            lp[j] = predicted[(t, j)].ln() + log_density[(t, j)];
        }
        let max = lp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(MarkovError::DegenerateDensity { t });
        }
        let s: f64 = lp.iter().map(|v| (v - max).exp()).sum();
        loglik += max + s.ln();
        for j in 0..m {
            filtered[(t, j)] = (lp[j] - max).exp() / s;
        }
    }
    Ok(FilterOutput { predicted, filtered, loglik })
}

/// Backward (Kim) smoother over a filter pass.
pub fn kim_smoother<F>(out: &FilterOutput, transition: F) -> DMatrix<f64>
where
    F: Fn(usize) -> TransitionMatrix,
{
    let (t_len, m) = out.filtered.shape();
    let mut smoothed = out.filtered.clone();
    if t_len == 0 {
        return smoothed;
    }
    for t in (0..t_len - 1).rev() {
        let p = transition(t + 1);
        let ratio: Vec<f64> = (0..m)
            .map(|j| {
                let pred = out.predicted[(t + 1, j)];
                if pred > 0.0 { smoothed[(t + 1, j)] / pred } else { 0.0 }
            })
            .collect();
        let mut total = 0.0;
        for i in 0..m {
            let v = out.filtered[(t, i)] * (0..m).map(|j| p.get(i, j) * ratio[j]).sum::<f64>();
            smoothed[(t, i)] = v;
            total += v;
        }
        for i in 0..m {
            smoothed[(t, i)] /= total;
        }
    }
    smoothed
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_coefficients_give_uniform_rows() {
        let p = transition_logit(&[0.3], &TransitionCoefs::zeros(3, 1));
        for i in 0..3 {
            for j in 0..3 {
                assert!((p.get(i, j) - 1.0 / 3.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn logit_inversion() {
        let mut c = TransitionCoefs::zeros(2, 0);
        c.coef_mut(0, 0)[0] = 9f64.ln();
        let p = transition_logit(&[], &c);
        assert!((p.get(0, 0) - 0.9).abs() < 1e-15);
        assert!((p.get(1, 0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn durations() {
        let p = TransitionMatrix::from_rows(&[&[0.5, 0.5], &[0.05, 0.95]]).unwrap();
        let d = expected_durations(&p);
        assert_eq!(d[0], 2.0);
        assert!((d[1] - 20.0).abs() < 1e-9);
        let absorbing = TransitionMatrix::from_rows(&[&[1.0, 0.0], &[0.1, 0.9]]).unwrap();
        assert!(expected_durations(&absorbing)[0].is_infinite());
    }

    #[test]
    fn ergodic_distribution() {
        let p = TransitionMatrix::from_rows(&[&[0.95, 0.05], &[0.10, 0.90]]).unwrap();
        let pi = p.ergodic();
        assert!((pi[0] - 2.0 / 3.0).abs() < 1e-12 && (pi[1] - 1.0 / 3.0).abs() < 1e-12);
        let id = TransitionMatrix::from_rows(&[&[1.0, 0.0], &[0.0, 1.0]]).unwrap();
        assert_eq!(id.ergodic(), vec![0.5, 0.5]);
    }

    #[test]
    fn permuting_coefficients_permutes_the_matrix() {
        let c = TransitionCoefs::from_values(3, 1, vec![0.2, -0.4, 1.0, 0.3, -0.7, 0.1, 0.5, 0.9, -1.2, 0.4, 0.0, 0.6])
            .unwrap();
        let order = [2, 0, 1];
        let e = [0.8];
        let p = transition_logit(&e, &c);
        let q = transition_logit(&e, &c.permuted(&order));
        for i in 0..3 {
            for j in 0..3 {
                assert!((q.get(i, j) - p.get(order[i], order[j])).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn absorbing_chain_keeps_known_start() {
        let id = TransitionMatrix::from_rows(&[&[1.0, 0.0], &[0.0, 1.0]]).unwrap();
        let dens = DMatrix::from_row_slice(4, 2, &[-1.0, -0.2, -3.0, -0.1, -0.5, -2.0, -1.0, -1.0]);
        let out = hamilton_filter_core(&dens, |_| id.clone(), &[1.0, 0.0]).unwrap();
        for t in 0..4 {
            assert_eq!(out.filtered[(t, 0)], 1.0);
        }
        let s = kim_smoother(&out, |_| id.clone());
        assert!((0..4).all(|t| s[(t, 0)] == 1.0));
    }
}
