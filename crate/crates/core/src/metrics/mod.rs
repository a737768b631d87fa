//! Quality and diversity measures: Vendi Score, Truncated Entropy, Improved
//! Precision/Recall, a quantized divergence-frontier score and the one-tailed
//! paired t-test used to compare configurations.

mod entropy;
mod mauve;
mod precision_recall;
mod ttest;
mod vendi;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use entropy::{truncated_entropy, TruncatedEntropyConfig};
pub use mauve::{divergence_frontier, frontier_area, mauve_from_histograms, mauve_lite, MauveConfig};
pub use precision_recall::{improved_precision_recall, PRResult};
pub use ttest::{paired_ttest_one_tailed, TTestResult};
pub use vendi::vendi_score;

/// A single metric evaluation with the parameters that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub name: String,
    pub value: f64,
    pub n_samples: usize,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, serde_json::Value>,
    /// Set when the input was degenerate and `value` is a convention rather
    /// than a measurement.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub degenerate: bool,
}

impl MetricValue {
    pub fn new(name: impl Into<String>, value: f64, n_samples: usize) -> Self {
        Self {
            name: name.into(),
            value,
            n_samples,
            params: BTreeMap::new(),
            degenerate: false,
        }
    }

    pub fn with_param(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.params.insert(key.to_owned(), value.into());
        self
    }
}
