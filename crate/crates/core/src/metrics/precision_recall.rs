use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::EmbeddingMatrix;
use crate::numerics::{euclidean, knn_radii, PointSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PRResult {
    pub precision: f64,
    pub recall: f64,
    pub k: usize,
}

/// Fraction of `probe` points inside at least one hypersphere of `support`
/// (boundary counts as inside).
fn coverage(probe: &PointSet, support: &PointSet, k: usize) -> Result<f64> {
    let radii = knn_radii(support, k)?;
    let inside = probe
        .rows()
        .filter(|q| {
            support
                .rows()
                .zip(&radii)
                .any(|(s, &r)| euclidean(q, s) <= r)
        })
        .count();
    Ok(inside as f64 / probe.len() as f64)
}

/// k-NN manifold precision (generated points covered by the reference
/// manifold) and recall (reference points covered by the generated one).
pub fn improved_precision_recall(gen: &EmbeddingMatrix, reference: &EmbeddingMatrix, k: usize) -> Result<PRResult> {
    if gen.dim() != reference.dim() {
        return Err(Error::Dimension(format!(
            "generated embeddings have dimension {}, reference {}",
            gen.dim(),
            reference.dim()
        )));
    }
    for (label, set) in [("generated", gen), ("reference", reference)] {
        if set.len() <= k {
            return Err(Error::InvalidArgument(format!(
                "{label} set has {} points; k = {k} needs more",
                set.len()
            )));
        }
    }
    Ok(PRResult {
        precision: coverage(gen.points(), reference.points(), k)?,
        recall: coverage(reference.points(), gen.points(), k)?,
        k,
    })
}
