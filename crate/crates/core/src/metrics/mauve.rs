use super::MetricValue;
use crate::error::{Error, Result};
use crate::features::EmbeddingMatrix;
use crate::numerics::{kmeans, KMeansConfig};

/// Settings for the quantized divergence-frontier score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MauveConfig {
    /// Fixed cluster count; `None` uses `max(2, ⌊(N_gen + N_ref) / 10⌋)`.
    pub clusters: Option<usize>,
    /// Exponent scale `c` in `exp(-c · KL)`.
    pub scaling: f64,
    /// Mixture weights are `i / (grid_points + 1)` for `i = 1..=grid_points`.
    pub grid_points: usize,
    /// Added to every histogram bin before renormalizing.
    pub smoothing: f64,
    pub seed: u64,
    pub kmeans: KMeansConfig,
}

impl Default for MauveConfig {
    fn default() -> Self {
        Self {
            clusters: None,
            scaling: 5.0,
            grid_points: 25,
            smoothing: 1e-8,
            seed: 25,
            kmeans: KMeansConfig::default(),
        }
    }
}

impl MauveConfig {
    pub fn cluster_count(&self, total: usize) -> usize {
        self.clusters.unwrap_or_else(|| (total / 10).max(2))
    }
}

fn kl(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .filter(|(&x, _)| x > 0.0)
        .map(|(&x, &y)| x * (x / y).ln())
        .sum()
}

/// Frontier points `(exp(-c·KL(Q‖R)), exp(-c·KL(P‖R)))` for
/// `R = w·P + (1-w)·Q` over the weight grid.
pub fn divergence_frontier(p: &[f64], q: &[f64], cfg: &MauveConfig) -> Vec<(f64, f64)> {
    let g = cfg.grid_points;
    (1..=g)
        .map(|i| {
            let w = i as f64 / (g + 1) as f64;
            let r: Vec<f64> = p.iter().zip(q).map(|(a, b)| w * a + (1.0 - w) * b).collect();
            ((-cfg.scaling * kl(q, &r)).exp(), (-cfg.scaling * kl(p, &r)).exp())
        })
        .collect()
}

/// Trapezoid area under the frontier after sorting by the first coordinate
/// and closing it with `(0, 1)` and `(1, 0)`.
pub fn frontier_area(points: &[(f64, f64)]) -> f64 {
    let mut pts = Vec::with_capacity(points.len() + 2);
    pts.push((0.0, 1.0));
    pts.extend_from_slice(points);
    pts.push((1.0, 0.0));
    // Stable sort keeps the closing endpoints outermost on ties.
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.windows(2)
        .map(|w| (w[1].0 - w[0].0) * 0.5 * (w[0].1 + w[1].1))
        .sum()
}

fn smooth(hist: &[f64], eps: f64) -> Vec<f64> {
    let total: f64 = hist.iter().map(|h| h + eps).sum();
    hist.iter().map(|h| (h + eps) / total).collect()
}

/// Frontier area for two histograms over the same bins. Smoothing is
/// applied here, so raw counts are accepted.
pub fn mauve_from_histograms(p: &[f64], q: &[f64], cfg: &MauveConfig) -> Result<f64> {
    if p.len() != q.len() || p.is_empty() {
        return Err(Error::Dimension("histograms must be non-empty and of equal length".into()));
    }
    let (p, q) = (smooth(p, cfg.smoothing), smooth(q, cfg.smoothing));
    Ok(frontier_area(&divergence_frontier(&p, &q, cfg)))
}

/// Simplified MAUVE: quantize the union of both embedding sets with seeded
/// k-means, compare the two cluster histograms along the divergence
/// frontier and report the area under it, in `(0, 1]`.
pub fn mauve_lite(gen: &EmbeddingMatrix, reference: &EmbeddingMatrix, cfg: &MauveConfig) -> Result<MetricValue> {
    let total = gen.len() + reference.len();
    let clusters = cfg.cluster_count(total);
    if total < 2 * clusters {
        return Err(Error::InvalidArgument(format!(
            "{total} points cannot support {clusters} clusters (need at least {})",
            2 * clusters
        )));
    }
    let union = gen.points().concat(reference.points())?;
    let base = MetricValue::new("mauve_lite", 1.0, total)
        .with_param("clusters", clusters)
        .with_param("scaling", cfg.scaling)
        .with_param("grid_points", cfg.grid_points)
        .with_param("seed", cfg.seed);

    let first = union.row(0);
    if union.rows().all(|r| r == first) {
        return Ok(MetricValue {
            degenerate: true,
            ..base
        });
    }

    let km = kmeans(&union, clusters, cfg.seed, cfg.kmeans)?;
    let mut p = vec![0.0; clusters];
    let mut q = vec![0.0; clusters];
    for (i, &label) in km.assignments.iter().enumerate() {
        if i < gen.len() {
            p[label] += 1.0;
        } else {
            q[label] += 1.0;
        }
    }
    let value = mauve_from_histograms(&p, &q, cfg)?;
    Ok(MetricValue { value, ..base })
}
