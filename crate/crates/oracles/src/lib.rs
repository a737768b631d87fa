//! Independent brute-force reference computations for the test suites.
//!
//! Nothing here shares code with the library paths it checks: the
//! eigenvalue oracle goes through the characteristic polynomial, the
//! neighbourhood oracles sort full distance tables, and the Student-t
//! tail is integrated numerically.

/// Coefficients `c[0..=n]` of `det(λI - A)` (monic, `c[n] = 1`) via
/// Faddeev-LeVerrier.
pub fn characteristic_polynomial(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut c = vec![0.0; n + 1];
    c[n] = 1.0;
    let mut m = vec![vec![0.0; n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                next[i][j] = (0..n).map(|l| a[i][l] * m[l][j]).sum::<f64>();
            }
            next[i][i] += c[n - k + 1];
        }
        m = next;
        let trace: f64 = (0..n)
            .map(|i| (0..n).map(|l| a[i][l] * m[l][i]).sum::<f64>())
            .sum();
        c[n - k] = -trace / k as f64;
    }
    c
}

pub fn eval_poly(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

/// Real roots of the characteristic polynomial of a symmetric matrix,
/// sorted descending. Brackets sign changes on a fine grid over the
/// Gershgorin interval and bisects each bracket to machine precision.
pub fn char_poly_eigenvalues(a: &[Vec<f64>]) -> Vec<f64> {
    let c = characteristic_polynomial(a);
    let radius = a
        .iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        + 1e-3;
    let steps = 400_000usize;
    let h = 2.0 * radius / steps as f64;
    let mut roots = Vec::new();
    let mut x0 = -radius;
    let mut f0 = eval_poly(&c, x0);
    for s in 1..=steps {
        let x1 = -radius + s as f64 * h;
        let f1 = eval_poly(&c, x1);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0.signum() != f1.signum() && f1 != 0.0 {
            let (mut lo, mut hi, mut flo) = (x0, x1, f0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let fm = eval_poly(&c, mid);
                if fm == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        x0 = x1;
        f0 = f1;
    }
    roots.sort_by(|a, b| b.total_cmp(a));
    roots
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// k-th nearest-neighbour distance by fully sorting each distance row.
pub fn brute_knn_radii(points: &[Vec<f64>], k: usize) -> Vec<f64> {
    (0..points.len())
        .map(|i| {
            let mut ds: Vec<f64> = (0..points.len())
                .filter(|&j| j != i)
                .map(|j| dist(&points[i], &points[j]))
                .collect();
            ds.sort_by(f64::total_cmp);
            ds[k - 1]
        })
        .collect()
}

/// Fraction of `probe` points that fall inside at least one support
/// hypersphere (boundary inclusive).
pub fn brute_coverage(probe: &[Vec<f64>], support: &[Vec<f64>], k: usize) -> f64 {
    let radii = brute_knn_radii(support, k);
    let mut inside = 0usize;
    for q in probe {
        let mut hit = false;
        for (s, r) in support.iter().zip(&radii) {
            if dist(q, s) <= *r {
                hit = true;
            }
        }
        if hit {
            inside += 1;
        }
    }
    inside as f64 / probe.len() as f64
}

/// Upper-tail probability `P(T > t)` of Student's t with `df` degrees of
/// freedom, by composite Simpson quadrature.
///
/// Substituting `x = sqrt(df) tan θ` turns the density into
/// `cos^(df-1) θ` on `(-π/2, π/2)`, a smooth bounded integrand, so both the
/// tail and the normaliser are integrated without any special functions.
pub fn student_t_upper_tail(t: f64, df: f64) -> f64 {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let f = |theta: f64| theta.cos().max(0.0).powf(df - 1.0);
    let theta0 = (t / df.sqrt()).atan();
    let tail = simpson(f, theta0, half_pi, 200_000);
    let total = simpson(f, -half_pi, half_pi, 400_000);
    tail / total
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}
