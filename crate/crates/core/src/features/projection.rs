use super::{ngram_profile, tokenize, EmbeddingMatrix};
use crate::error::Result;
use crate::numerics::PointSet;

/// Deterministic stand-in for a neural text embedder.
///
/// Each n-gram feature is hashed to a pseudo-random ±1 direction and a
/// text's embedding is the sum of its feature directions weighted by
/// `1 + ln(count)`, so repeated function words do not swamp the rest,
/// plus one constant bias direction so empty texts still have a nonzero
/// row. Output is raw (not normalized), like a neural embedder's.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionEmbedder {
    pub dim: usize,
    pub seed: u64,
    pub orders: Vec<usize>,
}

impl Default for ProjectionEmbedder {
    fn default() -> Self {
        Self {
            dim: 128,
            seed: 0x5eed_e3be_dd16_0001,
            orders: vec![1, 2],
        }
    }
}

const BIAS_FEATURE: &str = "\u{0}bias";

impl ProjectionEmbedder {
    pub fn embed_one(&self, text: &str) -> Vec<f64> {
        let tokens = tokenize(text);
        let profile = ngram_profile(&tokens, &self.orders);
        let mut row = vec![0.0; self.dim];
        self.accumulate(&mut row, BIAS_FEATURE, 1.0);
        for slot in 0..self.orders.len() {
            for (key, &count) in profile.counts(slot) {
                self.accumulate(&mut row, key, 1.0 + (count as f64).ln());
            }
        }
        let scale = 1.0 / (self.dim as f64).sqrt();
        row.iter_mut().for_each(|v| *v *= scale);
        row
    }

    pub fn embed<S: AsRef<str>>(&self, ids: &[String], texts: &[S]) -> Result<EmbeddingMatrix> {
        let mut coords = Vec::with_capacity(texts.len() * self.dim);
        for t in texts {
            coords.extend(self.embed_one(t.as_ref()));
        }
        EmbeddingMatrix::new(PointSet::new(texts.len(), self.dim, coords)?, ids.to_vec())
    }

    fn accumulate(&self, row: &mut [f64], feature: &str, weight: f64) {
        let base = fnv1a64(feature.as_bytes()) ^ self.seed;
        for (j, v) in row.iter_mut().enumerate() {
            let bits = splitmix64(base.wrapping_add((j as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)));
            *v += if bits >> 63 == 0 { weight } else { -weight };
        }
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
