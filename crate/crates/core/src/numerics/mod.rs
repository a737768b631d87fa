//! Dense symmetric linear algebra, exact nearest-neighbour geometry and
//! k-means clustering. Everything here is a pure function over immutable
//! inputs.

mod eigen;
mod kmeans;
mod knn;

pub use eigen::{covariance_spectrum, sym_eigendecompose, sym_eigenvalues};
pub use kmeans::{kmeans, KMeansConfig, KMeansResult};
pub use knn::{euclidean, knn_radii};

use crate::error::{Error, Result};

/// A dense symmetric matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl SymMatrix {
    /// Builds a matrix from row-major entries, rejecting non-finite or
    /// asymmetric input. Symmetry is checked exactly.
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Dimension("matrix dimension must be positive".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        for i in 0..dim {
            for j in 0..dim {
                let v = entries[i * dim + j];
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        location: format!("matrix entry ({i}, {j})"),
                    });
                }
                if j > i && v != entries[j * dim + i] {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self { dim, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::Dimension(format!(
                    "row {i} has length {}, expected {dim}",
                    row.len()
                )));
            }
            entries.extend_from_slice(row);
        }
        Self::new(dim, entries)
    }

    /// Builds a matrix from a function evaluated on the upper triangle and
    /// mirrored, so the result is symmetric by construction.
    pub fn from_upper(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                entries[i * dim + j] = v;
                entries[j * dim + i] = v;
            }
        }
        Self::new(dim, entries)
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1.0;
        }
        Self { dim, entries }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn frobenius(&self) -> f64 {
        self.entries.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Returns the matrix multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|v| v * factor).collect(),
        }
    }

    /// Applies the same permutation to rows and columns:
    /// `out[i][j] = self[perm[i]][perm[j]]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.dim {
            return Err(Error::Dimension("permutation length differs from dimension".into()));
        }
        let n = self.dim;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                entries[i * n + j] = self.get(perm[i], perm[j]);
            }
        }
        Ok(Self { dim: n, entries })
    }
}

/// Eigenvalues sorted non-increasing, optionally with unit eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[i]` belongs to `eigenvalues[i]`.
    pub eigenvectors: Option<Vec<Vec<f64>>>,
}

impl Spectrum {
    /// Tolerance used to tell numerical noise from genuine negative
    /// eigenvalues of a PSD matrix.
    pub fn psd_tolerance(source: &SymMatrix) -> f64 {
        1e-9 * source.max_abs()
    }

    /// Clamps eigenvalues in `[-tol, 0)` to zero. Anything more negative is
    /// rejected.
    pub fn clamp_psd(mut self, tol: f64) -> Result<Self> {
        for v in &mut self.eigenvalues {
            if *v < 0.0 {
                if *v < -tol {
                    return Err(Error::NotPsd { value: *v, tol });
                }
                *v = 0.0;
            }
        }
        Ok(self)
    }

    /// Rebuilds `V diag(λ) Vᵀ`; `None` when eigenvectors were not kept.
    pub fn reconstruct(&self) -> Option<SymMatrix> {
        let vecs = self.eigenvectors.as_ref()?;
        let n = vecs.first().map_or(0, Vec::len);
        SymMatrix::from_upper(n, |i, j| {
            self.eigenvalues
                .iter()
                .zip(vecs)
                .map(|(l, v)| l * v[i] * v[j])
                .sum()
        })
        .ok()
    }
}

/// `n` points in `d` dimensions, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    n: usize,
    d: usize,
    coords: Vec<f64>,
}

impl PointSet {
    pub fn new(n: usize, d: usize, coords: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Dimension("point set must contain at least one point".into()));
        }
        if d == 0 {
            return Err(Error::Dimension("point dimension must be positive".into()));
        }
        if coords.len() != n * d {
            return Err(Error::Dimension(format!(
                "expected {} coordinates for {n} points in {d} dimensions, got {}",
                n * d,
                coords.len()
            )));
        }
        if let Some(pos) = coords.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                location: format!("point {} coordinate {}", pos / d, pos % d),
            });
        }
        Ok(Self { n, d, coords })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != d) {
            return Err(Error::Dimension(format!("row {i} has a different dimension")));
        }
        Self::new(rows.len(), d, rows.concat())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.d)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Stacks two point sets of equal dimension.
    pub fn concat(&self, other: &PointSet) -> Result<PointSet> {
        if self.d != other.d {
            return Err(Error::Dimension(format!(
                "cannot stack {}-dimensional and {}-dimensional points",
                self.d, other.d
            )));
        }
        let mut coords = self.coords.clone();
        coords.extend_from_slice(&other.coords);
        Ok(PointSet {
            n: self.n + other.n,
            d: self.d,
            coords,
        })
    }
}
