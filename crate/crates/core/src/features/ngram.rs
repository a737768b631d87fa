use std::collections::BTreeMap;

pub const DEFAULT_NGRAM_ORDERS: [usize; 4] = [1, 2, 3, 4];

/// Contiguous n-gram counts of one text for each configured order.
///
/// Keys are the n tokens joined by a single space; tokens never contain
/// whitespace, so the encoding is unambiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct NGramProfile {
    orders: Vec<usize>,
    counts: Vec<BTreeMap<String, u32>>,
    sq_norms: Vec<f64>,
    token_count: usize,
}

impl NGramProfile {
    pub fn orders(&self) -> &[usize] {
        &self.orders
    }

    pub fn token_count(&self) -> usize {
        self.token_count
    }

    /// Count map for the `slot`-th configured order.
    pub fn counts(&self, slot: usize) -> &BTreeMap<String, u32> {
        &self.counts[slot]
    }

    /// Count map for order `n`, if configured.
    pub fn counts_for(&self, n: usize) -> Option<&BTreeMap<String, u32>> {
        self.orders.iter().position(|&o| o == n).map(|s| &self.counts[s])
    }

    /// Squared Euclidean norm of the count vector for `slot`.
    pub(crate) fn sq_norm(&self, slot: usize) -> f64 {
        self.sq_norms[slot]
    }
}

pub fn ngram_profile<S: AsRef<str>>(tokens: &[S], orders: &[usize]) -> NGramProfile {
    let mut counts = Vec::with_capacity(orders.len());
    for &n in orders {
        let mut map = BTreeMap::new();
        if n > 0 && tokens.len() >= n {
            for window in tokens.windows(n) {
                let key = window
                    .iter()
                    .map(AsRef::as_ref)
                    .collect::<Vec<_>>()
                    .join(" ");
                *map.entry(key).or_insert(0u32) += 1;
            }
        }
        counts.push(map);
    }
    let sq_norms = counts
        .iter()
        .map(|m| m.values().map(|&c| (c as f64) * (c as f64)).sum::<f64>())
        .collect();
    NGramProfile {
        orders: orders.to_vec(),
        counts,
        sq_norms,
        token_count: tokens.len(),
    }
}
