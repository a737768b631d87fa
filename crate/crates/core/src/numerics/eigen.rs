use super::{PointSet, Spectrum, SymMatrix};
use crate::error::{Error, Result};

/// Off-diagonal norm threshold relative to the Frobenius norm.
const JACOBI_REL_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Full eigendecomposition by the cyclic Jacobi method.
///
/// Eigenvalues come back sorted non-increasing, each paired with a unit
/// eigenvector. The input is validated at construction, so only finite
/// symmetric matrices reach this point.
pub fn sym_eigendecompose(m: &SymMatrix) -> Spectrum {
    jacobi(m, true)
}

/// Same as [`sym_eigendecompose`] without accumulating eigenvectors.
pub fn sym_eigenvalues(m: &SymMatrix) -> Spectrum {
    jacobi(m, false)
}

fn jacobi(m: &SymMatrix, want_vectors: bool) -> Spectrum {
    let n = m.dim();
    let mut a = m.entries().to_vec();
    let mut v = if want_vectors {
        let mut id = vec![0.0; n * n];
        for i in 0..n {
            id[i * n + i] = 1.0;
        }
        Some(id)
    } else {
        None
    };

    let frob = m.frobenius();
    let threshold = JACOBI_REL_TOL * frob;

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let off = off_diagonal_norm(&a, n);
        if off <= threshold || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                // signum(0) is 1 in Rust, which is the convention we want.
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let new_kp = c * akp - s * akq;
                    let new_kq = s * akp + c * akq;
                    a[k * n + p] = new_kp;
                    a[p * n + k] = new_kp;
                    a[k * n + q] = new_kq;
                    a[q * n + k] = new_kq;
                }
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;

                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&i| a[i * n + i]).collect();
    let eigenvectors = v.map(|v| {
        order
            .iter()
            .map(|&col| (0..n).map(|row| v[row * n + col]).collect())
            .collect()
    });
    Spectrum {
        eigenvalues,
        eigenvectors,
    }
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[i * n + j] * a[i * n + j];
            }
        }
    }
    s.sqrt()
}

/// The `n` largest eigenvalues of the empirical covariance of the rows
/// (mean-centred, divisor `n - 1`).
///
/// When the dimension is at least the row count the `n x n` Gram matrix of
/// the centred rows is decomposed instead; it shares the nonzero spectrum.
/// Otherwise the `d x d` covariance is used and the remaining `n - d`
/// eigenvalues, which are exactly zero, are appended. Either way the result
/// has `n` entries, clamped at zero within the PSD tolerance.
pub fn covariance_spectrum(x: &PointSet) -> Result<Spectrum> {
    let n = x.len();
    let d = x.dim();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "covariance needs at least 2 rows, got {n}"
        )));
    }
    let mut mean = vec![0.0; d];
    for row in x.rows() {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let centred: Vec<Vec<f64>> = x
        .rows()
        .map(|r| r.iter().zip(&mean).map(|(v, m)| v - m).collect())
        .collect();
    let denom = (n - 1) as f64;

    let matrix = if d >= n {
        SymMatrix::from_upper(n, |i, j| dot(&centred[i], &centred[j]) / denom)?
    } else {
        SymMatrix::from_upper(d, |a, b| {
            centred.iter().map(|r| r[a] * r[b]).sum::<f64>() / denom
        })?
    };
    let tol = Spectrum::psd_tolerance(&matrix);
    let mut spectrum = sym_eigenvalues(&matrix).clamp_psd(tol)?;
    spectrum.eigenvalues.resize(n, 0.0);
    Ok(spectrum)
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
