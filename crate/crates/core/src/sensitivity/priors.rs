use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ParameterVector, PARAMETER_COUNT, PARAMETER_NAMES};

/// Independent uniform priors, one `[lower, upper]` per parameter in
/// [`PARAMETER_NAMES`] order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriorSpec {
    pub bounds: [(f64, f64); PARAMETER_COUNT],
}

impl Default for PriorSpec {
    fn default() -> Self {
        Self {
            bounds: [
                (0.01, 0.10), // eps_T
                (0.1, 1.0),   // chi_0
                (0.01, 0.1),  // delta_sigma
                (0.01, 1.0),  // lambda_T
                (0.01, 1.0),  // lambda_sigma
                (0.0, 0.05),  // lambda_A
                (0.1, 1.0),   // M_T
                (0.1, 1.0),   // M_sigma
                (0.25, 1.0),  // E
                (0.1, 10.0),  // alpha
                (0.1, 10.0),  // nu
                (0.1, 10.0),  // F_1
                (0.1, 10.0),  // F_2
            ],
        }
    }
}

impl PriorSpec {
    /// Priors on the unit cube, for analytic test functions.
    pub fn unit(k: usize) -> Result<Vec<(f64, f64)>> {
        if k == 0 {
            return Err(Error::Argument("need at least one parameter".into()));
        }
        Ok(vec![(0.0, 1.0); k])
    }

    pub fn lower(&self, i: usize) -> f64 {
        self.bounds[i].0
    }

    pub fn upper(&self, i: usize) -> f64 {
        self.bounds[i].1
    }

    pub fn width(&self, i: usize) -> f64 {
        self.bounds[i].1 - self.bounds[i].0
    }

    pub fn validate(&self) -> Result<()> {
        let bad: Vec<&str> = self
            .bounds
            .iter()
            .zip(PARAMETER_NAMES)
            .filter(|((a, b), _)| !(a < b && a.is_finite() && b.is_finite()))
            .map(|(_, n)| n)
            .collect();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(format!("prior bounds need lower < upper: {}", bad.join(", "))))
        }
    }

    pub fn contains(&self, theta: &ParameterVector) -> bool {
        theta
            .to_array()
            .iter()
            .zip(&self.bounds)
            .all(|(v, (a, b))| v >= a && v <= b)
    }

    /// Box centre.
    pub fn midpoint(&self) -> [f64; PARAMETER_COUNT] {
        std::array::from_fn(|i| 0.5 * (self.bounds[i].0 + self.bounds[i].1))
    }
}

/// Saltelli-type design: `A`, `B`, and `C_i` (`A` with column `i` from `B`).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrices {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub seed: u64,
}

impl SampleMatrices {
    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn k(&self) -> usize {
        self.a.first().map_or(0, Vec::len)
    }

    /// Row `row` of `C_i`.
    pub fn c_row(&self, i: usize, row: usize) -> Vec<f64> {
        let mut r = self.a[row].clone();
        r[i] = self.b[row][i];
        r
    }

    /// Full matrix `C_i`.
    pub fn c(&self, i: usize) -> Vec<Vec<f64>> {
        (0..self.n()).map(|r| self.c_row(i, r)).collect()
    }

    /// Every row to evaluate, ordered `A`, `B`, `C_1`, ..., `C_k`.
    pub fn all_rows(&self) -> Vec<Vec<f64>> {
        let mut rows = Vec::with_capacity((self.k() + 2) * self.n());
        rows.extend(self.a.iter().cloned());
        rows.extend(self.b.iter().cloned());
        for i in 0..self.k() {
            rows.extend(self.c(i));
        }
        rows
    }
}

/// Draws `A` and `B` with `n` rows from independent uniforms on `bounds`.
pub fn sample_box(n: usize, bounds: &[(f64, f64)], seed: u64) -> Result<SampleMatrices> {
    if n < 2 {
        return Err(Error::Argument(format!("need at least 2 samples, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        bounds.iter().map(|&(a, b)| a + (b - a) * rng.random::<f64>()).collect()
    };
    let a: Vec<Vec<f64>> = (0..n).map(|_| draw(&mut rng)).collect();
    let b: Vec<Vec<f64>> = (0..n).map(|_| draw(&mut rng)).collect();
    Ok(SampleMatrices { a, b, seed })
}

/// [`sample_box`] on the parameter priors.
pub fn sample_matrices(n: usize, priors: &PriorSpec, seed: u64) -> Result<SampleMatrices> {
    priors.validate()?;
    sample_box(n, &priors.bounds, seed)
}

/// `n` independent draws from the box.
pub fn sample_points(n: usize, bounds: &[(f64, f64)], seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| bounds.iter().map(|&(a, b)| a + (b - a) * rng.random::<f64>()).collect())
        .collect()
}
