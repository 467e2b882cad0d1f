//! First-order and total-effect indices from the `A`, `B`, `C_i` design.
//!
//! With `C_i` equal to `A` except for column `i` (taken from `B`), `Y_B` and
//! `Y_Ci` share only parameter `i` while `Y_A` and `Y_Ci` share every
//! parameter except `i`. Hence
//!
//! ```text
//! S_i  = (Y_B . Y_Ci - f0^2) / (Y_A . Y_A - f0^2)
//! S_Ti = 1 - (Y_A . Y_Ci - f0^2) / (Y_A . Y_A - f0^2)
//! ```
//!
//! with `f0 = mean(Y_A)` and dot products divided by `N`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SobolResult {
    pub first_order: Vec<f64>,
    pub total: Vec<f64>,
    pub f0_sq: f64,
    pub variance: f64,
    pub n: usize,
}

impl SobolResult {
    /// Indices outside `[0, 1]` (Monte-Carlo noise), reported raw.
    pub fn noisy(&self) -> Vec<usize> {
        (0..self.first_order.len())
            .filter(|&i| {
                let out = |v: f64| !(0.0..=1.0).contains(&v);
                out(self.first_order[i]) || out(self.total[i])
            })
            .collect()
    }

    /// Total effects scaled to sum to one.
    pub fn normalized_total(&self) -> Vec<f64> {
        normalize(&self.total)
    }

    pub fn normalized_first_order(&self) -> Vec<f64> {
        normalize(&self.first_order)
    }
}

pub(crate) fn normalize(v: &[f64]) -> Vec<f64> {
    let s: f64 = v.iter().map(|x| x.max(0.0)).sum();
    if s > 0.0 {
        v.iter().map(|x| x.max(0.0) / s).collect()
    } else {
        vec![0.0; v.len()]
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / a.len() as f64
}

/// Indices from model outputs on `A`, `B` and each `C_i`.
pub fn sobol_indices(y_a: &[f64], y_b: &[f64], y_c: &[Vec<f64>]) -> Result<SobolResult> {
    let n = y_a.len();
    if n < 2 || y_b.len() != n || y_c.iter().any(|c| c.len() != n) {
        return Err(Error::Dimension("Sobol outputs must share a length of at least 2".into()));
    }
    if y_a.iter().chain(y_b).chain(y_c.iter().flatten()).any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite model output in Sobol estimate".into()));
    }
    // shifting every output by the same constant leaves the indices
    // unchanged in exact arithmetic and avoids cancellation
    let shift = y_a.iter().sum::<f64>() / n as f64;
    let centre = |y: &[f64]| -> Vec<f64> { y.iter().map(|v| v - shift).collect() };
    let (a, b) = (centre(y_a), centre(y_b));
    let c: Vec<Vec<f64>> = y_c.iter().map(|y| centre(y)).collect();

    let f0 = a.iter().sum::<f64>() / n as f64;
    let f0_sq = f0 * f0;
    let variance = dot(&a, &a) - f0_sq;
    let scale = dot(y_a, y_a).max(f64::MIN_POSITIVE);
    if variance.abs() < 1e-14 * scale {
        return Err(Error::DegenerateVariance(variance));
    }
    let first_order = c.iter().map(|ci| (dot(&b, ci) - f0_sq) / variance).collect();
    let total = c.iter().map(|ci| 1.0 - (dot(&a, ci) - f0_sq) / variance).collect();
    Ok(SobolResult {
        first_order,
        total,
        f0_sq: (f0 + shift).powi(2),
        variance,
        n,
    })
}

/// Per-component indices for a vector QoI. `y_a[r]` is the QoI vector of
/// row `r`.
pub fn sobol_indices_vector(
    y_a: &[Vec<f64>],
    y_b: &[Vec<f64>],
    y_c: &[Vec<Vec<f64>>],
) -> Result<Vec<SobolResult>> {
    let m = y_a.first().map_or(0, Vec::len);
    (0..m)
        .map(|t| {
            let col = |y: &[Vec<f64>]| -> Vec<f64> { y.iter().map(|r| r[t]).collect() };
            let c: Vec<Vec<f64>> = y_c.iter().map(|ci| col(ci)).collect();
            sobol_indices(&col(y_a), &col(y_b), &c)
        })
        .collect()
}
