//! Bai–Perron multiple structural breaks by global SSR minimisation.
//!
//! The optimal partition for every break count `m <= max_breaks` comes from
//! one dynamic programme over segment sums of squared residuals. The break
//! count is then chosen by BIC, or by the sequential `sup F(l+1 | l)` test.

use chrono::NaiveDate;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::{DiagnosticsError, Result};
use crate::simulation::rng::stream;
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BreakSelection {
    Bic,
    /// Sequential `sup F(l+1 | l)` at the given significance level, with
    /// null quantiles simulated from `reps` seeded replications.
    SequentialSupF { level: f64, reps: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BreakTestResult {
    /// Index of the last observation of each regime except the final one.
    pub break_indices: Vec<usize>,
    pub num_breaks: usize,
    pub segment_ssr: f64,
    /// BIC for `m = 0..=max_breaks` (or the sup-F statistics for the sequential rule).
    pub selection_criterion_values: Vec<f64>,
    /// Minimal SSR for each candidate `m`.
    pub ssr_by_breaks: Vec<f64>,
    pub min_segment: usize,
}

impl BreakTestResult {
    pub fn break_dates(&self, dates: &[NaiveDate]) -> Vec<NaiveDate> {
        self.break_indices.iter().map(|&i| dates[i]).collect()
    }
}

/// Segment SSR oracle: fills `out[j - start]` with `SSR(start..=j)` for all `j >= start`.
trait SegmentCost: Sync {
    fn len(&self) -> usize;
    fn row(&self, start: usize, out: &mut Vec<f64>);
}

struct MeanCost {
    s1: Vec<f64>,
    s2: Vec<f64>,
}

impl MeanCost {
    fn new(y: &[f64]) -> Self {
        let mut s1 = vec![0.0; y.len() + 1];
        let mut s2 = vec![0.0; y.len() + 1];
        for (i, v) in y.iter().enumerate() {
            s1[i + 1] = s1[i] + v;
            s2[i + 1] = s2[i] + v * v;
        }
        Self { s1, s2 }
    }
}

impl SegmentCost for MeanCost {
    fn len(&self) -> usize {
        self.s1.len() - 1
    }

    fn row(&self, start: usize, out: &mut Vec<f64>) {
        out.clear();
        for j in start..self.len() {
            let n = (j - start + 1) as f64;
            let a = self.s1[j + 1] - self.s1[start];
            let b = self.s2[j + 1] - self.s2[start];
            out.push((b - a * a / n).max(0.0));
        }
    }
}

/// Recursive least squares from each segment start.
struct RegressionCost<'a> {
    y: &'a [f64],
    x: &'a DMatrix<f64>,
}

impl SegmentCost for RegressionCost<'_> {
    fn len(&self) -> usize {
        self.y.len()
    }

    fn row(&self, start: usize, out: &mut Vec<f64>) {
        out.clear();
        let q = self.x.ncols();
        let mut xtx = DMatrix::<f64>::zeros(q, q);
        let mut xty = DVector::<f64>::zeros(q);
        let mut yty = 0.0;
        for j in start..self.y.len() {
            let xi = self.x.row(j).transpose();
            xtx += &xi * xi.transpose();
            xty += &xi * self.y[j];
            yty += self.y[j] * self.y[j];
            let ssr = if j + 1 - start >= q {
                match xtx.clone().cholesky() {
                    Some(ch) => {
                        let b = ch.solve(&xty);
                        (yty - b.dot(&xty)).max(0.0)
                    }
                    None => f64::INFINITY,
                }
            } else {
                f64::INFINITY
            };
            out.push(ssr);
        }
    }
}

struct Partitions {
    /// `ssr[m]` = minimal SSR with `m` breaks.
    ssr: Vec<f64>,
    /// `breaks[m]` = break indices of that optimum.
    breaks: Vec<Vec<usize>>,
}

fn optimal_partitions(cost: &dyn SegmentCost, max_breaks: usize, h: usize) -> Partitions {
    let t = cost.len();
    let inf = f64::INFINITY;
    // best[k][j]: min SSR of 0..=j split into k+1 segments; arg[k][j]: start of the last segment.
    let mut best = vec![vec![inf; t]; max_breaks + 1];
    let mut arg = vec![vec![0usize; t]; max_breaks + 1];
    let mut row = Vec::with_capacity(t);
    cost.row(0, &mut row);
    for j in h - 1..t {
        best[0][j] = row[j];
    }
    for k in 1..=max_breaks {
        let (done, rest) = best.split_at_mut(k);
        let prev = &done[k - 1];
        let cur = &mut rest[0];
        for start in k * h..t {
            if !prev[start - 1].is_finite() {
                continue;
            }
            cost.row(start, &mut row);
            for j in start + h - 1..t {
                let v = prev[start - 1] + row[j - start];
                if v < cur[j] {
                    cur[j] = v;
                    arg[k][j] = start;
                }
            }
        }
    }
    let mut ssr = Vec::with_capacity(max_breaks + 1);
    let mut breaks = Vec::with_capacity(max_breaks + 1);
    for m in 0..=max_breaks {
        ssr.push(best[m][t - 1]);
        let mut b = Vec::with_capacity(m);
        let mut end = t - 1;
        for k in (1..=m).rev() {
            let start = arg[k][end];
            b.push(start - 1);
            end = start - 1;
        }
        b.reverse();
        breaks.push(b);
    }
    Partitions { ssr, breaks }
}

/// Bai–Perron break detection. `x = None` tests for breaks in the mean.
pub fn bai_perron(
    y: &[f64],
    x: Option<&DMatrix<f64>>,
    max_breaks: usize,
    trim: f64,
    selection: BreakSelection,
) -> Result<BreakTestResult> {
    if !(0.05..=0.25).contains(&trim) {
        return Err(DiagnosticsError::InvalidTrim(trim));
    }
    let t = y.len();
    if let Some(x) = x {
        if x.nrows() != t {
            return Err(DiagnosticsError::InvalidInput("regressor rows must match observations".into()));
        }
    }
    let q = x.map_or(1, |x| x.ncols());
    let h = ((trim * t as f64).ceil() as usize).max(q + 1);
    if t < (max_breaks + 1) * h || t < 2 {
        return Err(DiagnosticsError::TooShort { needed: (max_breaks + 1) * h, got: t });
    }

    let mean_cost;
    let reg_cost;
    let cost: &dyn SegmentCost = match x {
        None => {
            mean_cost = MeanCost::new(y);
            &mean_cost
        }
        Some(x) => {
            reg_cost = RegressionCost { y, x };
            &reg_cost
        }
    };
    let parts = optimal_partitions(cost, max_breaks, h);

    let tf = t as f64;
    let (num_breaks, criterion) = match selection {
        BreakSelection::Bic => {
            let bic: Vec<f64> = parts
                .ssr
                .iter()
                .enumerate()
                .map(|(m, ssr)| {
                    let params = ((m + 1) * q + m) as f64;
                    (ssr / tf).max(f64::MIN_POSITIVE).ln() + params * tf.ln() / tf
                })
                .collect();
            let m = argmin(&bic);
            (m, bic)
        }
        BreakSelection::SequentialSupF { level, reps, seed } => {
            let null = sup_f_null(q, trim, reps, seed);
            let mut stats = Vec::new();
            let mut m = 0;
            while m < max_breaks {
                let f = sup_f_next(cost, &parts, m, h, q);
                stats.push(f);
                // Maximum over m+1 segments of independent sup-F(1|0) draws.
                let prob = (1.0 - level).powf(1.0 / (m as f64 + 1.0));
                let idx = ((prob * null.len() as f64).ceil() as usize).clamp(1, null.len()) - 1;
                if f <= null[idx] {
                    break;
                }
                m += 1;
            }
            (m, stats)
        }
    };

    Ok(BreakTestResult {
        break_indices: parts.breaks[num_breaks].clone(),
        num_breaks,
        segment_ssr: parts.ssr[num_breaks],
        selection_criterion_values: criterion,
        ssr_by_breaks: parts.ssr,
        min_segment: h,
    })
}

fn argmin(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::INFINITY), |(bi, bv), (i, &x)| if x < bv { (i, x) } else { (bi, bv) })
        .0
}

/// `sup F(m+1 | m)`: largest SSR reduction from one extra break inside any
/// segment of the m-break optimum, scaled by the m-break error variance.
fn sup_f_next(cost: &dyn SegmentCost, parts: &Partitions, m: usize, h: usize, q: usize) -> f64 {
    let t = cost.len();
    let mut bounds = vec![0usize];
    bounds.extend(parts.breaks[m].iter().map(|b| b + 1));
    bounds.push(t);
    let sigma2 = parts.ssr[m] / (t - (m + 1) * q - m) as f64;
    let mut best_gain: f64 = 0.0;
    let mut row = Vec::new();
    let mut tail = Vec::new();
    for w in bounds.windows(2) {
        let (s, e) = (w[0], w[1]);
        if e - s < 2 * h {
            continue;
        }
        cost.row(s, &mut row);
        let whole = row[e - 1 - s];
        for k in s + h - 1..e - h {
            cost.row(k + 1, &mut tail);
            let split = row[k - s] + tail[e - 1 - (k + 1)];
            best_gain = best_gain.max(whole - split);
        }
    }
    best_gain / sigma2
}

/// Sorted null draws of `sup F(1|0)` for `q` regressors (intercept plus
/// standard normal columns) on white noise of length 200.
fn sup_f_null(q: usize, trim: f64, reps: usize, seed: u64) -> Vec<f64> {
    const T: usize = 200;
    let mut draws: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, r as u64);
            let y: Vec<f64> = (0..T).map(|_| StandardNormal.sample(&mut rng)).collect();
            let h = ((trim * T as f64).ceil() as usize).max(q + 1);
            if q == 1 {
                let cost = MeanCost::new(&y);
                let parts = optimal_partitions(&cost, 0, h);
                sup_f_next(&cost, &parts, 0, h, q)
            } else {
                let x = DMatrix::from_fn(T, q, |_, j| if j == 0 { 1.0 } else { StandardNormal.sample(&mut rng) });
                let cost = RegressionCost { y: &y, x: &x };
                let parts = optimal_partitions(&cost, 0, h);
                sup_f_next(&cost, &parts, 0, h, q)
            }
        })
        .collect();
    draws.sort_by(|a, b| a.total_cmp(b));
    draws
}
