use super::PointSet;
use crate::error::{Error, Result};

#[inline]
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Distance from each point to its `k`-th nearest neighbour among the other
/// points of the same set. Exact, `O(n²)`.
pub fn knn_radii(p: &PointSet, k: usize) -> Result<Vec<f64>> {
    let n = p.len();
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    if k >= n {
        return Err(Error::InvalidArgument(format!(
            "k = {k} needs more than {k} points, got {n}"
        )));
    }
    let mut buf: Vec<(f64, usize)> = Vec::with_capacity(n - 1);
    let mut radii = Vec::with_capacity(n);
    for i in 0..n {
        buf.clear();
        let pi = p.row(i);
        buf.extend(
            (0..n)
                .filter(|&j| j != i)
                .map(|j| (euclidean(pi, p.row(j)), j)),
        );
        // Ties resolve by index; the selected distance is the same either way.
        let (_, kth, _) =
            buf.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        radii.push(kth.0);
    }
    Ok(radii)
}
