use rand::Rng;

use super::LogProbVector;
use crate::error::{Error, Result};

/// Inverse-CDF draw over ascending token ids from a normalized distribution.
/// Uses exactly one uniform from `rng`.
pub fn sample_token<R: Rng + ?Sized>(dist: &LogProbVector, rng: &mut R) -> Result<u32> {
    let probs: Vec<f64> = dist.values().iter().map(|v| v.exp()).collect();
    let sum: f64 = probs.iter().sum();
    if !dist.is_normalized() || (sum - 1.0).abs() > 1e-6 {
        return Err(Error::NotNormalized { sum });
    }
    let u: f64 = rng.random();
    let target = u * sum;
    let mut cum = 0.0;
    let mut last = None;
    for (id, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        cum += p;
        last = Some(id as u32);
        if target < cum {
            return Ok(id as u32);
        }
    }
    // Only reachable through rounding at the very top of the CDF.
    last.ok_or_else(|| Error::InvalidArgument("cannot sample from an empty distribution".into()))
}
