use std::collections::BTreeMap;

use super::{EmbeddingMatrix, NGramProfile};
use crate::error::{Error, Result};
use crate::numerics::SymMatrix;

/// A symmetric kernel matrix with an exactly-unit diagonal and entries in
/// `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix(SymMatrix);

impl SimilarityMatrix {
    /// Validates the unit diagonal and entry bounds.
    pub fn new(m: SymMatrix) -> Result<Self> {
        for i in 0..m.dim() {
            if m.get(i, i) != 1.0 {
                return Err(Error::InvalidArgument(format!(
                    "similarity diagonal entry {i} is {}, expected 1",
                    m.get(i, i)
                )));
            }
        }
        if let Some(pos) = m.entries().iter().position(|v| v.abs() > 1.0) {
            return Err(Error::InvalidArgument(format!(
                "similarity entry ({}, {}) outside [-1, 1]",
                pos / m.dim(),
                pos % m.dim()
            )));
        }
        Ok(Self(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(SymMatrix::from_rows(rows)?)
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.0.dim() == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }
}

// Norms are passed squared so identical count vectors give exactly 1:
// sqrt(s * s) == s for the integer sums involved.
fn sparse_cosine(a: &BTreeMap<String, u32>, sa: f64, b: &BTreeMap<String, u32>, sb: f64) -> f64 {
    if sa == 0.0 || sb == 0.0 {
        return 0.0;
    }
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let dot: f64 = small
        .iter()
        .filter_map(|(k, &c)| large.get(k).map(|&d| c as f64 * d as f64))
        .sum();
    (dot / (sa * sb).sqrt()).clamp(0.0, 1.0)
}

/// Mean over the configured n-gram orders of the cosine similarity between
/// count vectors. An order for which either text has no n-grams contributes
/// 0 off the diagonal; the diagonal is exactly 1.
pub fn ngram_kernel(profiles: &[NGramProfile]) -> Result<SimilarityMatrix> {
    let first = profiles
        .first()
        .ok_or_else(|| Error::InvalidArgument("n-gram kernel needs at least one profile".into()))?;
    let orders = first.orders();
    if orders.is_empty() {
        return Err(Error::InvalidArgument("no n-gram orders configured".into()));
    }
    if let Some(i) = profiles.iter().position(|p| p.orders() != orders) {
        return Err(Error::InvalidArgument(format!(
            "profile {i} uses different n-gram orders"
        )));
    }
    let slots = orders.len();
    let m = SymMatrix::from_upper(profiles.len(), |i, j| {
        if i == j {
            return 1.0;
        }
        let (a, b) = (&profiles[i], &profiles[j]);
        let total: f64 = (0..slots)
            .map(|s| sparse_cosine(a.counts(s), a.sq_norm(s), b.counts(s), b.sq_norm(s)))
            .sum();
        (total / slots as f64).min(1.0)
    })?;
    SimilarityMatrix::new(m)
}

/// Cosine similarity between embedding rows.
pub fn embedding_kernel(e: &EmbeddingMatrix) -> Result<SimilarityMatrix> {
    let norms: Vec<f64> = (0..e.len())
        .map(|i| e.row(i).iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    if let Some(row) = norms.iter().position(|&n| n == 0.0) {
        return Err(Error::ZeroNormRow {
            row,
            id: e.ids()[row].clone(),
        });
    }
    let m = SymMatrix::from_upper(e.len(), |i, j| {
        if i == j {
            return 1.0;
        }
        let dot: f64 = e.row(i).iter().zip(e.row(j)).map(|(a, b)| a * b).sum();
        (dot / (norms[i] * norms[j])).clamp(-1.0, 1.0)
    })?;
    SimilarityMatrix::new(m)
}
