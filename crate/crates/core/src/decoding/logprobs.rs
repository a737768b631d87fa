use crate::error::{Error, Result};

/// Logits or log-probabilities over a fixed vocabulary.
///
/// Entries are finite or `-inf` (a token the distribution rules out).
#[derive(Debug, Clone, PartialEq)]
pub struct LogProbVector {
    values: Vec<f64>,
    normalized: bool,
}

impl LogProbVector {
    /// Wraps raw scores (logits). Rejects NaN and `+inf`.
    pub fn from_logits(values: Vec<f64>) -> Result<Self> {
        validate(&values)?;
        if values.is_empty() {
            return Err(Error::InvalidArgument("empty distribution".into()));
        }
        Ok(Self {
            values,
            normalized: false,
        })
    }

    /// Wraps log-probabilities, checking that they exponentiate to a sum of
    /// one within `1e-6`.
    pub fn from_log_probs(values: Vec<f64>) -> Result<Self> {
        let mut v = Self::from_logits(values)?;
        let sum: f64 = v.values.iter().map(|x| x.exp()).sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::NotNormalized { sum });
        }
        v.normalized = true;
        Ok(v)
    }

    /// Log-softmax of the given scores.
    pub fn normalize(values: Vec<f64>) -> Result<Self> {
        let v = Self::from_logits(values)?;
        Ok(v.log_softmax())
    }

    pub(crate) fn normalized_unchecked(values: Vec<f64>) -> Self {
        Self {
            values,
            normalized: true,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn vocab_size(&self) -> usize {
        self.values.len()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// `ln Σ exp(values)`; `-inf` when every entry is `-inf`.
    pub fn log_sum_exp(&self) -> f64 {
        log_sum_exp(self.values.iter().copied())
    }

    pub fn log_softmax(&self) -> Self {
        if self.normalized {
            return self.clone();
        }
        let z = self.log_sum_exp();
        Self::normalized_unchecked(self.values.iter().map(|v| v - z).collect())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let z = if self.normalized { 0.0 } else { self.log_sum_exp() };
        self.values.iter().map(|v| (v - z).exp()).collect()
    }

    /// Divides every score by `temperature`. The result is unnormalized.
    pub fn with_temperature(&self, temperature: f64) -> Self {
        Self {
            values: self.values.iter().map(|v| v / temperature).collect(),
            normalized: self.normalized && temperature == 1.0,
        }
    }

    /// Shannon entropy (nats) of the normalized distribution.
    pub fn entropy(&self) -> f64 {
        let lp = self.log_softmax();
        lp.values
            .iter()
            .filter(|v| v.is_finite())
            .map(|&v| -v.exp() * v)
            .sum()
    }
}

fn validate(values: &[f64]) -> Result<()> {
    if let Some(i) = values.iter().position(|v| v.is_nan() || *v == f64::INFINITY) {
        return Err(Error::NonFinite {
            location: format!("token {i} of a distribution"),
        });
    }
    Ok(())
}

pub(crate) fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Token ids kept by a truncation rule.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidSet {
    ids: Vec<u32>,
    mass: f64,
}

impl ValidSet {
    /// Sorts and deduplicates `ids`; rejects an empty set or a mass outside
    /// `(0, 1]` (with a little slack for rounding).
    pub fn new(mut ids: Vec<u32>, mass: f64) -> Result<Self> {
        ids.sort_unstable();
        ids.dedup();
        if ids.is_empty() {
            return Err(Error::InvalidArgument("valid set is empty".into()));
        }
        if !(mass > 0.0 && mass <= 1.0 + 1e-9) {
            return Err(Error::InvalidArgument(format!("valid-set mass {mass} outside (0, 1]")));
        }
        Ok(Self {
            ids,
            mass: mass.min(1.0),
        })
    }

    pub fn all(vocab_size: usize) -> Self {
        Self {
            ids: (0..vocab_size as u32).collect(),
            mass: 1.0,
        }
    }

    /// Ascending, unique.
    pub fn ids(&self) -> &[u32] {
        &self.ids
    }

    /// Probability mass of the kept tokens under the truncated distribution.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn contains(&self, id: u32) -> bool {
        self.ids.binary_search(&id).is_ok()
    }

    pub fn is_subset_of(&self, other: &ValidSet) -> bool {
        self.ids.iter().all(|&id| other.contains(id))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nan_and_positive_infinity() {
        assert!(LogProbVector::from_logits(vec![0.0, f64::NAN]).is_err());
        assert!(LogProbVector::from_logits(vec![0.0, f64::INFINITY]).is_err());
        assert!(LogProbVector::from_logits(vec![0.0, f64::NEG_INFINITY]).is_ok());
    }

    #[test]
    fn normalization_check() {
        assert!(LogProbVector::from_log_probs(vec![0.5f64.ln(), 0.5f64.ln()]).is_ok());
        assert!(matches!(
            LogProbVector::from_log_probs(vec![0.0, 0.0]),
            Err(Error::NotNormalized { .. })
        ));
        let n = LogProbVector::normalize(vec![1.0, 2.0, 3.0]).unwrap();
        let s: f64 = n.probabilities().iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn valid_set_sorted_unique() {
        let v = ValidSet::new(vec![5, 1, 5, 3], 0.5).unwrap();
        assert_eq!(v.ids(), &[1, 3, 5]);
        assert!(ValidSet::new(vec![], 0.5).is_err());
        assert!(ValidSet::new(vec![1], 0.0).is_err());
    }
}
