//! Lexical and semantic feature representations of texts and the
//! similarity kernels built from them.

mod dgem;
mod kernel;
mod ngram;
mod projection;
mod tokenize;

pub use dgem::{
    decode_embeddings, encode_embeddings, read_embeddings, write_embeddings, DGEM_MAGIC, DGEM_VERSION,
};
pub use kernel::{embedding_kernel, ngram_kernel, SimilarityMatrix};
pub use ngram::{ngram_profile, NGramProfile, DEFAULT_NGRAM_ORDERS};
pub use projection::ProjectionEmbedder;
pub use tokenize::tokenize;

use crate::error::{Error, Result};
use crate::numerics::PointSet;

/// Text embeddings, one row per sample, with row ids aligned to sample ids.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    points: PointSet,
    ids: Vec<String>,
}

impl EmbeddingMatrix {
    pub fn new(points: PointSet, ids: Vec<String>) -> Result<Self> {
        if ids.len() != points.len() {
            return Err(Error::Dimension(format!(
                "{} row ids for {} rows",
                ids.len(),
                points.len()
            )));
        }
        Ok(Self { points, ids })
    }

    /// Rows are given ids `"0"`, `"1"`, ...
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let points = PointSet::from_rows(rows)?;
        let ids = (0..points.len()).map(|i| i.to_string()).collect();
        Ok(Self { points, ids })
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.points.row(i)
    }

    /// Rows whose id satisfies `keep`, in their original order.
    pub fn select(&self, mut keep: impl FnMut(&str) -> bool) -> Result<Self> {
        let d = self.dim();
        let mut coords = Vec::new();
        let mut ids = Vec::new();
        for (i, id) in self.ids.iter().enumerate() {
            if keep(id) {
                coords.extend_from_slice(self.row(i));
                ids.push(id.clone());
            }
        }
        Self::new(PointSet::new(ids.len(), d, coords)?, ids)
    }

    /// Rows in the order of `wanted`; every id must be present.
    pub fn reorder(&self, wanted: &[String]) -> Result<Self> {
        let index: std::collections::HashMap<&str, usize> = self
            .ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        let mut coords = Vec::with_capacity(wanted.len() * self.dim());
        for id in wanted {
            let i = *index
                .get(id.as_str())
                .ok_or_else(|| Error::InvalidArgument(format!("no embedding for sample '{id}'")))?;
            coords.extend_from_slice(self.row(i));
        }
        Self::new(PointSet::new(wanted.len(), self.dim(), coords)?, wanted.to_vec())
    }

    pub fn concat(&self, other: &EmbeddingMatrix) -> Result<Self> {
        let points = self.points.concat(&other.points)?;
        let mut ids = self.ids.clone();
        ids.extend_from_slice(&other.ids);
        Self::new(points, ids)
    }
}
