//! Beta lag polynomial for MIDAS filtering.

use super::{GarchMidasError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BetaWeights {
    pub k: usize,
    pub w1: f64,
    pub w2: f64,
    /// `weights[j]` multiplies lag `j + 1`.
    pub weights: Vec<f64>,
}

/// `phi_k ∝ (k/(K+1))^(w1-1) (1 - k/(K+1))^(w2-1)` for `k = 1..=K`, normalised
/// to sum to one. The interior grid keeps the last lag's weight positive.
pub fn beta_weights(k: usize, w1: f64, w2: f64) -> Result<BetaWeights> {
    if k == 0 {
        return Err(GarchMidasError::InvalidSpec("K must be >= 1".into()));
    }
    if !(w1 >= 1.0) || !(w2 >= 1.0) || !w1.is_finite() || !w2.is_finite() {
        return Err(GarchMidasError::InvalidShape { w1, w2 });
    }
    let mut weights = vec![0.0; k];
    fill_weights(w1, w2, &mut weights);
    Ok(BetaWeights { k, w1, w2, weights })
}

/// Allocation-free kernel used inside the likelihood.
pub(crate) fn fill_weights(w1: f64, w2: f64, out: &mut [f64]) {
    let denom = out.len() as f64 + 1.0;
    // Work in logs so large shapes do not underflow before normalisation.
    let mut max = f64::NEG_INFINITY;
    for (j, w) in out.iter_mut().enumerate() {
        let x = (j + 1) as f64 / denom;
        let lw = (w1 - 1.0) * x.ln() + (w2 - 1.0) * (1.0 - x).ln();
        *w = lw;
        max = max.max(lw);
    }
    let mut sum = 0.0;
    for w in out.iter_mut() {
        *w = (*w - max).exp();
        sum += *w;
    }
    for w in out.iter_mut() {
        *w /= sum;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn flat_when_both_shapes_are_one() {
        let w = beta_weights(4, 1.0, 1.0).unwrap();
        assert!(w.weights.iter().all(|v| (v - 0.25).abs() < 1e-15));
    }

    #[test]
    fn restricted_two_lag_case() {
        // (1 - 1/3, 1 - 2/3) normalised
        let w = beta_weights(2, 1.0, 2.0).unwrap();
        assert!((w.weights[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((w.weights[1] - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn invalid_shapes() {
        assert!(matches!(beta_weights(3, 0.5, 2.0), Err(GarchMidasError::InvalidShape { .. })));
        assert!(matches!(beta_weights(3, 1.0, 0.9), Err(GarchMidasError::InvalidShape { .. })));
        assert!(beta_weights(0, 1.0, 2.0).is_err());
    }

    #[test]
    fn hump_shape_with_free_w1() {
        let w = beta_weights(12, 3.0, 5.0).unwrap();
        let peak = w.weights.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert!(peak > 0 && peak < 11);
    }

    proptest! {
        #[test]
        fn weights_are_a_distribution(k in 1usize..40, w1 in 1.0f64..20.0, w2 in 1.0f64..300.0) {
            let w = beta_weights(k, w1, w2).unwrap();
            let sum: f64 = w.weights.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-12);
            prop_assert!(w.weights.iter().all(|v| *v >= 0.0));
        }

        #[test]
        fn decreasing_when_w1_is_one(k in 2usize..40, w2 in 1.001f64..50.0) {
            let w = beta_weights(k, 1.0, w2).unwrap();
            prop_assert!(w.weights.windows(2).all(|p| p[1] < p[0]));
        }
    }
}
