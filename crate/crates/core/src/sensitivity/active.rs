//! Finite-difference gradients and the active-subspace covariance.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

use super::pool::parallel_map;
use super::priors::sample_points;
use super::sobol::{normalize, SobolResult};

/// Default finite-difference step as a fraction of each prior range.
pub const DEFAULT_REL_STEP: f64 = 1e-3;

/// Central differences with step `rel_step * (upper - lower)`; one-sided
/// within one step of a bound.
pub fn gradient_fd<F>(f: &F, theta: &[f64], bounds: &[(f64, f64)], rel_step: f64) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Result<f64> + ?Sized,
{
    if !(rel_step > 0.0) {
        return Err(Error::Argument(format!("rel_step must be positive, got {rel_step}")));
    }
    if theta.len() != bounds.len() {
        return Err(Error::Dimension("theta and bounds differ in length".into()));
    }
    let eval = |x: &[f64], i: usize| -> Result<f64> {
        let v = f(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Numeric(format!("non-finite value while differentiating coordinate {i}")))
        }
    };
    let mut centre = None;
    let mut grad = Vec::with_capacity(theta.len());
    let mut x = theta.to_vec();
    for (i, &(lo, hi)) in bounds.iter().enumerate() {
        let h = rel_step * (hi - lo);
        let t = theta[i];
        let d = if t - h >= lo && t + h <= hi {
            x[i] = t + h;
            let up = eval(&x, i)?;
            x[i] = t - h;
            let down = eval(&x, i)?;
            (up - down) / (2.0 * h)
        } else {
            let f0 = match centre {
                Some(v) => v,
                None => {
                    let v = eval(theta, i)?;
                    centre = Some(v);
                    v
                }
            };
            if t + h <= hi {
                log::debug!("coordinate {i} near its lower bound: forward difference");
                x[i] = t + h;
                (eval(&x, i)? - f0) / h
            } else {
                log::debug!("coordinate {i} near its upper bound: backward difference");
                x[i] = t - h;
                (f0 - eval(&x, i)?) / h
            }
        };
        x[i] = t;
        grad.push(d);
    }
    Ok(grad)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActiveSubspaceResult {
    /// `(1/N) sum grad grad^T`.
    pub covariance: Vec<Vec<f64>>,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// `eigenvectors[j]` belongs to `eigenvalues[j]`.
    pub eigenvectors: Vec<Vec<f64>>,
    /// `alpha_i = sum_j lambda_j w_ij^2`.
    pub activity: Vec<f64>,
    pub n: usize,
}

impl ActiveSubspaceResult {
    pub fn relative_activity(&self) -> Vec<f64> {
        let s: f64 = self.activity.iter().sum();
        if s > 0.0 {
            self.activity.iter().map(|a| a / s).collect()
        } else {
            vec![0.0; self.activity.len()]
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.covariance.len()).map(|i| self.covariance[i][i]).sum()
    }
}

/// Covariance, eigenpairs and activity scores from gradient samples.
pub fn active_subspace_from_gradients(gradients: &[Vec<f64>]) -> Result<ActiveSubspaceResult> {
    let n = gradients.len();
    let k = gradients.first().map_or(0, Vec::len);
    if n == 0 || k == 0 || gradients.iter().any(|g| g.len() != k) {
        return Err(Error::Dimension("need at least one gradient of consistent length".into()));
    }
    let mut v = DMatrix::<f64>::zeros(k, k);
    for g in gradients {
        for i in 0..k {
            for j in 0..k {
                v[(i, j)] += g[i] * g[j];
            }
        }
    }
    v /= n as f64;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("non-finite gradient covariance".into()));
    }
    let eig = SymmetricEigen::try_new(v.clone(), 1e-15, 10_000)
        .ok_or_else(|| Error::Numeric("symmetric eigendecomposition did not converge".into()))?;
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let eigenvectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&j| eig.eigenvectors.column(j).iter().copied().collect())
        .collect();
    let activity = (0..k)
        .map(|i| {
            eigenvalues
                .iter()
                .zip(&eigenvectors)
                .map(|(l, w)| l * w[i] * w[i])
                .sum()
        })
        .collect();
    let covariance = (0..k).map(|i| (0..k).map(|j| v[(i, j)]).collect()).collect();
    Ok(ActiveSubspaceResult {
        covariance,
        eigenvalues,
        eigenvectors,
        activity,
        n,
    })
}

/// Monte-Carlo active subspace of `f` over uniform `bounds`.
///
/// Gradients are taken with respect to the box mapped onto `[-1, 1]^k`,
/// i.e. each physical derivative is multiplied by half its prior width, so
/// parameters of very different magnitude compete on equal terms.
pub fn active_subspace<F>(
    f: &F,
    bounds: &[(f64, f64)],
    n: usize,
    seed: u64,
    rel_step: f64,
) -> Result<ActiveSubspaceResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync + ?Sized,
{
    if n == 0 {
        return Err(Error::Argument("need at least one gradient sample".into()));
    }
    let points = sample_points(n, bounds, seed);
    let gradients = parallel_map(&points, |x| {
        let g = gradient_fd(f, x, bounds, rel_step).map_err(|e| Error::AtSample {
            theta: x.clone(),
            source: Box::new(e),
        })?;
        Ok(g.iter().zip(bounds).map(|(d, (lo, hi))| d * 0.5 * (hi - lo)).collect())
    })?;
    active_subspace_from_gradients(&gradients)
}

/// Side-by-side normalized sensitivities of the two methods.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodComparison {
    pub names: Vec<String>,
    /// Total-effect indices scaled to sum to one.
    pub variance_based: Vec<f64>,
    pub activity: Vec<f64>,
    /// Parameter indices, most sensitive first.
    pub variance_ranking: Vec<usize>,
    pub activity_ranking: Vec<usize>,
    /// Fraction of positions where both rankings agree.
    pub rank_agreement: f64,
    /// Size of the intersection of the two top-3 sets.
    pub top3_overlap: usize,
}

impl MethodComparison {
    pub fn rank_of(ranking: &[usize], parameter: usize) -> usize {
        ranking.iter().position(|&p| p == parameter).unwrap_or(usize::MAX)
    }
}

fn ranking(v: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[b].total_cmp(&v[a]).then(a.cmp(&b)));
    idx
}

/// Compares total-effect Sobol indices with activity scores.
pub fn compare_methods(names: &[&str], sobol: &SobolResult, asub: &ActiveSubspaceResult) -> Result<MethodComparison> {
    compare_scores(names, &sobol.total, &asub.activity)
}

/// [`compare_methods`] on raw total-effect indices and activity scores;
/// both are normalized to sum to one.
pub fn compare_scores(names: &[&str], total: &[f64], activity: &[f64]) -> Result<MethodComparison> {
    let k = names.len();
    if k == 0 || total.len() != k || activity.len() != k {
        return Err(Error::Dimension("both results must cover the same parameters".into()));
    }
    let variance_based = normalize(total);
    let activity = normalize(activity);
    let variance_ranking = ranking(&variance_based);
    let activity_ranking = ranking(&activity);
    let agree = variance_ranking
        .iter()
        .zip(&activity_ranking)
        .filter(|(a, b)| a == b)
        .count();
    let top3_overlap = variance_ranking[..k.min(3)]
        .iter()
        .filter(|p| activity_ranking[..k.min(3)].contains(p))
        .count();
    Ok(MethodComparison {
        names: names.iter().map(|s| s.to_string()).collect(),
        variance_based,
        activity,
        variance_ranking,
        activity_ranking,
        rank_agreement: agree as f64 / k as f64,
        top3_overlap,
    })
}
