use super::logprobs::log_sum_exp;
use super::{LogProbVector, ValidSet};
use crate::error::{Error, Result};

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::InvalidArgument(format!("gamma = {gamma} outside [0, 1]")));
    }
    Ok(())
}

/// `γ·a + (1-γ)·b` with the endpoints taken verbatim, so that `-inf` in the
/// ignored distribution cannot turn into NaN.
pub(crate) fn blend(a: f64, b: f64, gamma: f64) -> f64 {
    if gamma == 1.0 {
        a
    } else if gamma == 0.0 {
        b
    } else {
        gamma * a + (1.0 - gamma) * b
    }
}

/// Geometric interpolation of the instruct and base distributions restricted
/// to `valid`, renormalized there. Tokens outside `valid` get `-inf`.
///
/// Either argument may be raw logits or log-probabilities: the per-model
/// normalizers only add a constant to every score and cancel on
/// renormalization.
pub fn conformative_mix(
    instruct: &LogProbVector,
    base: &LogProbVector,
    valid: &ValidSet,
    gamma: f64,
) -> Result<LogProbVector> {
    check_gamma(gamma)?;
    if instruct.vocab_size() != base.vocab_size() {
        return Err(Error::VocabMismatch(format!(
            "instruct has {} tokens, base has {}",
            instruct.vocab_size(),
            base.vocab_size()
        )));
    }
    let (a, b) = (instruct.values(), base.values());
    restrict(instruct.vocab_size(), valid, |i| blend(a[i], b[i], gamma))
}

/// The instruct distribution restricted to `valid` and renormalized; the
/// decoding path when no base model is attached.
pub fn restrict_to_valid(dist: &LogProbVector, valid: &ValidSet) -> Result<LogProbVector> {
    let v = dist.values();
    restrict(dist.vocab_size(), valid, |i| v[i])
}

fn restrict(vocab: usize, valid: &ValidSet, score: impl Fn(usize) -> f64) -> Result<LogProbVector> {
    if let Some(&bad) = valid.ids().iter().find(|&&id| id as usize >= vocab) {
        return Err(Error::UnknownToken {
            id: bad,
            vocab_size: vocab,
        });
    }
    let mut out = vec![f64::NEG_INFINITY; vocab];
    for &id in valid.ids() {
        out[id as usize] = score(id as usize);
    }
    let z = log_sum_exp(valid.ids().iter().map(|&id| out[id as usize]));
    if z == f64::NEG_INFINITY {
        return Err(Error::InvalidArgument(
            "every token in the valid set has zero probability under the mixture".into(),
        ));
    }
    for &id in valid.ids() {
        out[id as usize] -= z;
    }
    Ok(LogProbVector::normalized_unchecked(out))
}
