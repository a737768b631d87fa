use super::MetricValue;
use crate::error::{Error, Result};
use crate::features::EmbeddingMatrix;
use crate::numerics::covariance_spectrum;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedEntropyConfig {
    /// Eigenvalues are floored here before taking logs.
    pub eigenvalue_floor: f64,
}

impl Default for TruncatedEntropyConfig {
    fn default() -> Self {
        Self {
            eigenvalue_floor: 1e-10,
        }
    }
}

/// Gaussian differential entropy restricted to the `N` largest covariance
/// eigenvalues: `(N/2) ln(2πe) + ½ Σ ln λᵢ`. Can be negative.
pub fn truncated_entropy(e: &EmbeddingMatrix, cfg: TruncatedEntropyConfig) -> Result<MetricValue> {
    let n = e.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "truncated entropy needs at least 2 samples, got {n}"
        )));
    }
    let spectrum = covariance_spectrum(e.points())?;
    let log_sum: f64 = spectrum
        .eigenvalues
        .iter()
        .map(|&l| l.max(cfg.eigenvalue_floor).ln())
        .sum();
    let two_pi_e = 2.0 * std::f64::consts::PI * std::f64::consts::E;
    let value = 0.5 * n as f64 * two_pi_e.ln() + 0.5 * log_sum;
    Ok(MetricValue::new("truncated_entropy", value, n).with_param("eigenvalue_floor", cfg.eigenvalue_floor))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ln_2pie() -> f64 {
        (2.0 * std::f64::consts::PI * std::f64::consts::E).ln()
    }

    #[test]
    fn identical_rows_hit_the_floor() {
        let e = EmbeddingMatrix::from_rows(&vec![vec![0.3, -1.0, 2.0]; 5]).unwrap();
        let te = truncated_entropy(&e, TruncatedEntropyConfig::default()).unwrap().value;
        let expected = 2.5 * ln_2pie() + 2.5 * 1e-10_f64.ln();
        assert!((te - expected).abs() < 1e-9);
    }

    #[test]
    fn two_point_hand_case() {
        let e = EmbeddingMatrix::from_rows(&[vec![0.0, 0.0], vec![2.0, 0.0]]).unwrap();
        let te = truncated_entropy(&e, TruncatedEntropyConfig::default()).unwrap().value;
        let expected = ln_2pie() + 0.5 * (2.0_f64.ln() + 1e-10_f64.ln());
        assert!((te - expected).abs() < 1e-12);
        assert!(te < 0.0);
    }

    #[test]
    fn translation_invariant() {
        let rows = vec![vec![0.0, 1.0, 3.0], vec![2.0, 0.5, 1.0], vec![-1.0, 2.0, 0.0], vec![1.0, 1.0, 1.0]];
        let shifted: Vec<Vec<f64>> = rows
            .iter()
            .map(|r| r.iter().map(|v| v + 10.0).collect())
            .collect();
        let cfg = TruncatedEntropyConfig::default();
        let a = truncated_entropy(&EmbeddingMatrix::from_rows(&rows).unwrap(), cfg).unwrap().value;
        let b = truncated_entropy(&EmbeddingMatrix::from_rows(&shifted).unwrap(), cfg).unwrap().value;
        assert!((a - b).abs() < 1e-6);
    }

    #[test]
    fn single_row_rejected() {
        let e = EmbeddingMatrix::from_rows(&[vec![1.0]]).unwrap();
        assert!(truncated_entropy(&e, TruncatedEntropyConfig::default()).is_err());
    }
}
