use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t: f64,
    pub df: usize,
    /// `P(T ≥ t)` under the null, for the alternative `mean(a) > mean(b)`.
    pub p_value: f64,
    pub mean_difference: f64,
    /// The paired differences had zero variance; `t` is ±∞ or 0 by
    /// convention and `p` is 0, 1 or 0.5 accordingly.
    pub degenerate: bool,
}

/// Upper tail of Student's t via the regularized incomplete beta function.
pub(crate) fn student_t_sf(t: f64, df: f64) -> f64 {
    let x = df / (df + t * t);
    let half_tail = 0.5 * beta_reg(0.5 * df, 0.5, x);
    if t >= 0.0 {
        half_tail
    } else {
        1.0 - half_tail
    }
}

/// One-tailed paired t-test of `mean(a) > mean(b)`.
pub fn paired_ttest_one_tailed(a: &[f64], b: &[f64]) -> Result<TTestResult> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "paired samples differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!("paired t-test needs n >= 2, got {n}")));
    }
    if let Some(i) = a.iter().chain(b).position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            location: format!("t-test input {i}"),
        });
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1) as f64;
    let df = n - 1;
    if var == 0.0 {
        let (t, p_value) = if mean > 0.0 {
            (f64::INFINITY, 0.0)
        } else if mean < 0.0 {
            (f64::NEG_INFINITY, 1.0)
        } else {
            (0.0, 0.5)
        };
        return Ok(TTestResult {
            t,
            df,
            p_value,
            mean_difference: mean,
            degenerate: true,
        });
    }
    let t = mean / (var.sqrt() / (n as f64).sqrt());
    Ok(TTestResult {
        t,
        df,
        p_value: student_t_sf(t, df as f64).clamp(0.0, 1.0),
        mean_difference: mean,
        degenerate: false,
    })
}
