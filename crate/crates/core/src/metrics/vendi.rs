use super::MetricValue;
use crate::error::Result;
use crate::features::SimilarityMatrix;
use crate::numerics::{sym_eigenvalues, Spectrum};

/// Exponential of the Shannon entropy of the eigenvalues of `K / N`.
///
/// Eigenvalues within the PSD tolerance below zero are clamped to zero and
/// the spectrum renormalized if the clamp moved its sum by more than
/// `1e-10`. The result is the effective number of distinct samples, in
/// `[1, N]`.
pub fn vendi_score(k: &SimilarityMatrix) -> Result<MetricValue> {
    let n = k.len();
    let scaled = k.matrix().scaled(1.0 / n as f64);
    let raw = sym_eigenvalues(&scaled);
    let before: f64 = raw.eigenvalues.iter().sum();
    let tol = Spectrum::psd_tolerance(&scaled);
    let mut lambdas = raw.clamp_psd(tol)?.eigenvalues;
    let after: f64 = lambdas.iter().sum();
    if (after - before).abs() > 1e-10 && after > 0.0 {
        lambdas.iter_mut().for_each(|l| *l /= after);
    }
    let entropy: f64 = lambdas
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.ln())
        .sum();
    let value = entropy.exp().clamp(1.0, n as f64);
    Ok(MetricValue::new("vendi_score", value, n))
}
