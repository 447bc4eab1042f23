//! Summary statistics for the diagnostics report.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Descriptives {
    pub n: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub min: f64,
    pub max: f64,
    pub skewness: f64,
    /// Excess kurtosis.
    pub kurtosis: f64,
}

pub fn describe(xs: &[f64]) -> Descriptives {
    let n = xs.len();
    let nf = n as f64;
    let mean = xs.iter().sum::<f64>() / nf;
    let m2 = xs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / nf;
    let m3 = xs.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / nf;
    let m4 = xs.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / nf;
    let (skewness, kurtosis) = if m2 > 0.0 { (m3 / m2.powf(1.5), m4 / (m2 * m2) - 3.0) } else { (0.0, 0.0) };
    Descriptives {
        n,
        mean,
        std_dev: if n > 1 { (m2 * nf / (nf - 1.0)).sqrt() } else { 0.0 },
        min: xs.iter().copied().fold(f64::INFINITY, f64::min),
        max: xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        skewness,
        kurtosis,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_sample() {
        let d = describe(&[1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(d.mean, 3.0);
        assert!((d.std_dev - 2.5f64.sqrt()).abs() < 1e-12);
        assert!(d.skewness.abs() < 1e-12);
        assert!((d.kurtosis - (-1.3)).abs() < 1e-12);
    }
}
