use serde::{Deserialize, Serialize};

use super::{LogProbVector, ValidSet};
use crate::error::{Error, Result};

/// How the instruct distribution is cut down before sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Truncation {
    Nucleus { p: f64 },
    TopK { k: usize },
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation::Nucleus { p: 0.95 }
    }
}

impl Truncation {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Truncation::Nucleus { p } if !(p > 0.0 && p <= 1.0) => {
                Err(Error::InvalidArgument(format!("nucleus p = {p} outside (0, 1]")))
            }
            Truncation::TopK { k: 0 } => Err(Error::InvalidArgument("top-k needs k >= 1".into())),
            _ => Ok(()),
        }
    }

    pub fn apply(&self, dist: &LogProbVector) -> Result<ValidSet> {
        match *self {
            Truncation::Nucleus { p } => truncate_nucleus(dist, p),
            Truncation::TopK { k } => truncate_topk(dist, k),
        }
    }
}

/// Token ids with nonzero probability, most probable first, ties broken by
/// ascending id. Returned alongside the normalized probabilities.
fn ranked(dist: &LogProbVector) -> (Vec<u32>, Vec<f64>) {
    let lp = dist.log_softmax();
    let probs: Vec<f64> = lp.values().iter().map(|v| v.exp()).collect();
    let mut order: Vec<u32> = (0..probs.len() as u32)
        .filter(|&i| probs[i as usize] > 0.0)
        .collect();
    let values = lp.values();
    order.sort_by(|&a, &b| {
        values[b as usize]
            .total_cmp(&values[a as usize])
            .then(a.cmp(&b))
    });
    (order, probs)
}

/// Shortest most-probable prefix whose cumulative probability reaches `p`.
/// At least one token is always kept; `p = 1` keeps every token with
/// nonzero probability.
pub fn truncate_nucleus(dist: &LogProbVector, p: f64) -> Result<ValidSet> {
    Truncation::Nucleus { p }.validate()?;
    let (order, probs) = ranked(dist);
    if order.is_empty() {
        return Err(Error::InvalidArgument("distribution has no support".into()));
    }
    let mut mass = 0.0;
    let mut kept = Vec::new();
    for &id in &order {
        kept.push(id);
        mass += probs[id as usize];
        // The slack only absorbs summation rounding; p = 1 is handled by
        // running out of tokens.
        if p < 1.0 && mass >= p - 1e-12 {
            break;
        }
    }
    ValidSet::new(kept, mass)
}

/// The `k` most probable tokens (ties by ascending id); all tokens with
/// nonzero probability when `k` exceeds that count.
pub fn truncate_topk(dist: &LogProbVector, k: usize) -> Result<ValidSet> {
    Truncation::TopK { k }.validate()?;
    let (order, probs) = ranked(dist);
    if order.is_empty() {
        return Err(Error::InvalidArgument("distribution has no support".into()));
    }
    let kept: Vec<u32> = order.into_iter().take(k).collect();
    let mass = kept.iter().map(|&i| probs[i as usize]).sum();
    ValidSet::new(kept, mass)
}
