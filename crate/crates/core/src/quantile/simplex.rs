//! Exact linear quantile regression by vertex descent.
//!
//! A vertex is a basis of `p` observations fitted exactly. From a vertex we
//! evaluate the one-sided directional derivative of the check loss along every
//! edge (two per basis member), take the steepest descending edge and move
//! along it to the minimiser of the piecewise-linear objective: breakpoints
//! are sorted and the slope grows by `|z_i|` at each one. When more than `p`
//! residuals are zero the vertex is degenerate and edges of every basis drawn
//! from the zero set are checked before declaring optimality.

use nalgebra::{DMatrix, DVector};

use super::{check_loss, QrError, Result};
use crate::linalg::ols;

/// Cap on `(p-1)`-subsets examined at one degenerate vertex.
const MAX_DEGENERATE_RAYS: usize = 20_000;

#[derive(Debug, Clone)]
pub struct SimplexSolution {
    pub beta: DVector<f64>,
    /// Observations fitted exactly by the final vertex.
    pub basis: Vec<usize>,
    pub objective: f64,
    pub iterations: usize,
    /// Optimality could not be certified at a degenerate vertex (too many ties).
    pub degenerate: bool,
}

struct Problem<'a> {
    y: &'a [f64],
    x: &'a DMatrix<f64>,
    tau: f64,
    zero_tol: f64,
}

struct Vertex {
    beta: DVector<f64>,
    residuals: Vec<f64>,
    basis: Vec<usize>,
}

impl Problem<'_> {
    fn n(&self) -> usize {
        self.y.len()
    }

    fn p(&self) -> usize {
        self.x.ncols()
    }

    fn rows(&self, idx: &[usize]) -> DMatrix<f64> {
        DMatrix::from_fn(idx.len(), self.p(), |i, j| self.x[(idx[i], j)])
    }

    fn vertex(&self, basis: Vec<usize>) -> Option<Vertex> {
        let xb = self.rows(&basis);
        let yb = DVector::from_iterator(basis.len(), basis.iter().map(|&i| self.y[i]));
        let beta = xb.lu().solve(&yb)?;
        if beta.iter().any(|v| !v.is_finite()) {
            return None;
        }
        let fitted = self.x * &beta;
        let mut residuals: Vec<f64> = self.y.iter().zip(fitted.iter()).map(|(y, f)| y - f).collect();
        for &i in &basis {
            residuals[i] = 0.0;
        }
        Some(Vertex { beta, residuals, basis })
    }

    fn is_zero(&self, r: f64) -> bool {
        r.abs() <= self.zero_tol
    }

    /// `z = X d` for a direction `d`.
    fn project(&self, d: &DVector<f64>) -> Vec<f64> {
        (self.x * d).data.into()
    }

    /// One-sided derivative of the objective along `d` (residuals move by `-t z`).
    fn derivative(&self, v: &Vertex, z: &[f64]) -> (f64, f64) {
        let tau = self.tau;
        let mut slope = 0.0;
        let mut scale = 0.0;
        for (r, zi) in v.residuals.iter().zip(z) {
            scale += zi.abs();
            if self.is_zero(*r) {
                slope += ((1.0 - tau) * zi).max(-tau * zi);
            } else if *r > 0.0 {
                slope -= tau * zi;
            } else {
                slope += (1.0 - tau) * zi;
            }
        }
        (slope, scale)
    }

    /// Exact line search from `v` along a descending direction; returns the
    /// observation whose residual hits zero at the minimiser.
    fn line_search(&self, v: &Vertex, z: &[f64], initial_slope: f64) -> Option<usize> {
        let mut breaks: Vec<(f64, usize)> = v
            .residuals
            .iter()
            .zip(z)
            .enumerate()
            .filter(|(_, (r, zi))| !self.is_zero(**r) && **zi != 0.0 && (**r > 0.0) == (**zi > 0.0))
            .map(|(i, (r, zi))| (r / zi, i))
            .collect();
        breaks.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut slope = initial_slope;
        for (_, i) in breaks {
            slope += z[i].abs();
            if slope >= 0.0 {
                return Some(i);
            }
        }
        None
    }
}

/// Candidate edge: direction, derivative, and the observations kept at zero.
struct Edge {
    slope: f64,
    z: Vec<f64>,
    keep: Vec<usize>,
}

fn basis_edges(prob: &Problem, v: &Vertex) -> Option<Vec<Edge>> {
    let p = prob.p();
    let inv = prob.rows(&v.basis).try_inverse()?;
    let mut edges = Vec::with_capacity(2 * p);
    for k in 0..p {
        let col = inv.column(k).into_owned();
        let keep: Vec<usize> = v.basis.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, &i)| i).collect();
        for sign in [1.0, -1.0] {
            let d = &col * sign;
            let z = prob.project(&d);
            let (slope, scale) = prob.derivative(v, &z);
            if slope < -1e-12 * scale.max(1.0) {
                edges.push(Edge { slope, z, keep: keep.clone() });
            }
        }
    }
    Some(edges)
}

/// Rays spanned by `(p-1)`-subsets of the zero set; `None` when there are too many.
fn degenerate_edges(prob: &Problem, v: &Vertex) -> Option<Vec<Edge>> {
    let p = prob.p();
    let zero: Vec<usize> = (0..prob.n()).filter(|&i| prob.is_zero(v.residuals[i])).collect();
    let mut count = 1usize;
    for i in 0..(p - 1) {
        count = count.saturating_mul(zero.len() - i) / (i + 1);
    }
    if count > MAX_DEGENERATE_RAYS {
        return None;
    }
    let mut edges = Vec::new();
    let mut subset: Vec<usize> = (0..p - 1).collect();
    loop {
        let keep: Vec<usize> = subset.iter().map(|&s| zero[s]).collect();
        if let Some(d) = null_direction(prob, &keep) {
            for sign in [1.0, -1.0] {
                let z = prob.project(&(&d * sign));
                let (slope, scale) = prob.derivative(v, &z);
                if slope < -1e-12 * scale.max(1.0) {
                    edges.push(Edge { slope, z, keep: keep.clone() });
                }
            }
        }
        // next combination
        let mut i = p - 1;
        loop {
            if i == 0 {
                return Some(edges);
            }
            i -= 1;
            if subset[i] < zero.len() - (p - 1 - i) {
                subset[i] += 1;
                for j in i + 1..p - 1 {
                    subset[j] = subset[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Direction orthogonal to the rows in `keep` (which must have rank `p - 1`).
fn null_direction(prob: &Problem, keep: &[usize]) -> Option<DVector<f64>> {
    let p = prob.p();
    if p == 1 {
        return Some(DVector::from_element(1, 1.0));
    }
    let a = prob.rows(keep);
    let svd = a.transpose().svd(true, false);
    let u = svd.u?;
    let s = &svd.singular_values;
    let smax = s.max();
    if s.iter().any(|v| *v <= 1e-10 * smax.max(1e-300)) {
        return None;
    }
    // Complete the column space of a' with one orthogonal vector.
    let mut best: Option<DVector<f64>> = None;
    for e in 0..p {
        let mut v = DVector::<f64>::zeros(p);
        v[e] = 1.0;
        let proj = &u * (u.transpose() * &v);
        let w = v - proj;
        if best.as_ref().is_none_or(|b| w.norm() > b.norm()) {
            best = Some(w);
        }
    }
    best.map(|w| w.normalize())
}

/// Start basis: observations closest to the least-squares fit, added greedily
/// while they increase the rank.
fn start_basis(prob: &Problem) -> Result<Vec<usize>> {
    let p = prob.p();
    let order: Vec<usize> = match ols(prob.y, prob.x) {
        Ok(fit) => {
            let mut idx: Vec<usize> = (0..prob.n()).collect();
            idx.sort_by(|&a, &b| fit.residuals[a].abs().total_cmp(&fit.residuals[b].abs()).then(a.cmp(&b)));
            idx
        }
        Err(_) => (0..prob.n()).collect(),
    };
    let scale = (0..p).map(|j| prob.x.column(j).amax()).fold(0.0, f64::max).max(1e-300);
    let mut basis = Vec::with_capacity(p);
    let mut ortho: Vec<DVector<f64>> = Vec::with_capacity(p);
    for i in order {
        let mut v: DVector<f64> = prob.x.row(i).transpose();
        for q in &ortho {
            let c = q.dot(&v);
            v -= q * c;
        }
        if v.norm() > 1e-9 * scale {
            ortho.push(v.normalize());
            basis.push(i);
            if basis.len() == p {
                return Ok(basis);
            }
        }
    }
    Err(QrError::RankDeficient)
}

/// Minimises `sum rho_tau(y - X b)` exactly.
pub fn solve(y: &[f64], x: &DMatrix<f64>, tau: f64) -> Result<SimplexSolution> {
    let (n, p) = x.shape();
    if !(tau > 0.0 && tau < 1.0) {
        return Err(QrError::InvalidTau(tau));
    }
    if y.len() != n || p == 0 {
        return Err(QrError::InvalidInput("y and X must be conformable with p >= 1".into()));
    }
    if n <= p {
        return Err(QrError::InvalidInput(format!("need n > p, got n = {n}, p = {p}")));
    }
    if y.iter().chain(x.iter()).any(|v| !v.is_finite()) {
        return Err(QrError::InvalidInput("non-finite value".into()));
    }
    let y_scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let prob = Problem { y, x, tau, zero_tol: 1e-11 * (1.0 + y_scale) };
    let mut v = prob.vertex(start_basis(&prob)?).ok_or(QrError::RankDeficient)?;
    let mut degenerate = false;
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut edges = basis_edges(&prob, &v).ok_or(QrError::RankDeficient)?;
        if edges.is_empty() && v.residuals.iter().filter(|r| prob.is_zero(**r)).count() > p {
            match degenerate_edges(&prob, &v) {
                Some(e) => edges = e,
                None => degenerate = true,
            }
        }
        // steepest edge, ties to the first generated
        let Some(best) = edges.into_iter().reduce(|a, b| if b.slope < a.slope { b } else { a }) else {
            break;
        };
        let Some(enter) = prob.line_search(&v, &best.z, best.slope) else {
            return Err(QrError::InvalidInput("objective unbounded along an edge".into()));
        };
        let mut basis = best.keep;
        basis.push(enter);
        let next = prob.vertex(basis).ok_or(QrError::RankDeficient)?;
        if !(objective(&next.residuals, tau) < objective(&v.residuals, tau)) {
            // no numerical progress left
            break;
        }
        v = next;
        if iterations > 50 * (n + p) {
            degenerate = true;
            break;
        }
    }
    let objective = objective(&v.residuals, tau);
    let mut basis = v.basis;
    basis.sort_unstable();
    Ok(SimplexSolution { beta: v.beta, basis, objective, iterations, degenerate })
}

fn objective(residuals: &[f64], tau: f64) -> f64 {
    residuals.iter().map(|r| check_loss(*r, tau)).sum()
}
