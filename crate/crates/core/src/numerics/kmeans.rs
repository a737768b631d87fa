use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::PointSet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub max_iterations: usize,
    pub restarts: usize,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            restarts: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub assignments: Vec<usize>,
    /// `clusters` rows of the input dimension.
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
}

/// Seeded k-means: k-means++ initialisation followed by Lloyd iterations,
/// repeated `cfg.restarts` times keeping the lowest inertia. An empty cluster
/// is reseeded with the point farthest from its current centroid.
pub fn kmeans(p: &PointSet, clusters: usize, seed: u64, cfg: KMeansConfig) -> Result<KMeansResult> {
    let n = p.len();
    if clusters == 0 {
        return Err(Error::InvalidArgument("cluster count must be positive".into()));
    }
    if clusters > n {
        return Err(Error::InvalidArgument(format!(
            "cannot form {clusters} clusters from {n} points"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeansResult> = None;
    for _ in 0..cfg.restarts.max(1) {
        let run = lloyd(p, init_plus_plus(p, clusters, &mut rng), cfg.max_iterations);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

#[inline]
fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn init_plus_plus(p: &PointSet, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = p.len();
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centroids = vec![p.row(first).to_vec()];
    let mut d2: Vec<f64> = p.rows().map(|r| sq_dist(r, &centroids[0])).collect();

    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // Rounding can leave `acc` a hair below `target`; take the last
            // candidate with positive weight.
            pick.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).unwrap())
        } else {
            // Every point coincides with a chosen centroid.
            let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen[next] = true;
        let c = p.row(next).to_vec();
        for (i, row) in p.rows().enumerate() {
            d2[i] = d2[i].min(sq_dist(row, &c));
        }
        centroids.push(c);
    }
    centroids
}

fn assign(p: &PointSet, centroids: &[Vec<f64>]) -> Vec<usize> {
    p.rows()
        .map(|row| {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (c, cen) in centroids.iter().enumerate() {
                let d = sq_dist(row, cen);
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            best
        })
        .collect()
}

fn lloyd(p: &PointSet, mut centroids: Vec<Vec<f64>>, max_iterations: usize) -> KMeansResult {
    let k = centroids.len();
    let d = p.dim();
    let mut assignments = assign(p, &centroids);
    for _ in 0..max_iterations {
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (row, &a) in p.rows().zip(&assignments) {
            counts[a] += 1;
            for (s, v) in sums[a].iter_mut().zip(row) {
                *s += v;
            }
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..p.len())
                    .max_by(|&i, &j| {
                        let di = sq_dist(p.row(i), &centroids[assignments[i]]);
                        let dj = sq_dist(p.row(j), &centroids[assignments[j]]);
                        di.total_cmp(&dj).then(j.cmp(&i))
                    })
                    .unwrap();
                centroids[c] = p.row(far).to_vec();
                counts[assignments[far]] -= 1;
                assignments[far] = c;
                counts[c] = 1;
            }
        }
        let next = assign(p, &centroids);
        if next == assignments {
            break;
        }
        assignments = next;
    }
    let inertia = p
        .rows()
        .zip(&assignments)
        .map(|(row, &a)| sq_dist(row, &centroids[a]))
        .sum();
    KMeansResult {
        assignments,
        centroids,
        inertia,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs() -> PointSet {
        let mut rows = Vec::new();
        for i in 0..20 {
            let jitter = (i as f64) * 0.01;
            rows.push(vec![jitter, -jitter]);
            rows.push(vec![100.0 + jitter, 100.0 - jitter]);
        }
        PointSet::from_rows(&rows).unwrap()
    }

    #[test]
    fn separates_two_blobs() {
        let p = blobs();
        let r = kmeans(&p, 2, 7, KMeansConfig::default()).unwrap();
        for i in 0..20 {
            assert_eq!(r.assignments[2 * i], r.assignments[0]);
            assert_eq!(r.assignments[2 * i + 1], r.assignments[1]);
        }
        assert_ne!(r.assignments[0], r.assignments[1]);
    }

    #[test]
    fn saturated_clustering_has_zero_inertia() {
        let p = PointSet::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 5.0], vec![3.0, 3.0]])
            .unwrap();
        let r = kmeans(&p, 4, 1, KMeansConfig::default()).unwrap();
        assert_eq!(r.inertia, 0.0);
        let mut labels = r.assignments.clone();
        labels.sort_unstable();
        assert_eq!(labels, vec![0, 1, 2, 3]);
    }

    #[test]
    fn deterministic_per_seed() {
        let p = blobs();
        let a = kmeans(&p, 5, 99, KMeansConfig::default()).unwrap();
        let b = kmeans(&p, 5, 99, KMeansConfig::default()).unwrap();
        assert_eq!(a, b);
        assert!(a.assignments.iter().all(|&l| l < 5));
    }

    #[test]
    fn duplicate_points_keep_labels_in_range() {
        let p = PointSet::from_rows(&vec![vec![1.0, 1.0]; 6]).unwrap();
        let r = kmeans(&p, 3, 0, KMeansConfig::default()).unwrap();
        assert!(r.assignments.iter().all(|&l| l < 3));
        assert_eq!(r.inertia, 0.0);
    }

    #[test]
    fn rejects_too_many_clusters() {
        let p = PointSet::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        assert!(kmeans(&p, 3, 0, KMeansConfig::default()).is_err());
    }
}
