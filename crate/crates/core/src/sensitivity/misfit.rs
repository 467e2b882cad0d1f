//! Radial simulations evaluated at the dataset time stamps, the data misfit
//! and the end-to-end sensitivity studies built on them.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{load_dataset, ConfluenceSeries};
use crate::mesh::{build_radial_mesh_with_exponent, DOMAIN_RADIUS};
use crate::model::{ParameterVector, PARAMETER_NAMES};
use crate::stepper::{initial_radial_tumor, ModelVariant, Stepper, StepperConfig, Trajectory};

use super::active::{active_subspace, compare_methods, ActiveSubspaceResult, MethodComparison};
use super::pool::parallel_map;
use super::priors::{sample_matrices, PriorSpec};
use super::sobol::{sobol_indices, SobolResult};

/// How model output is matched to observation days.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TimeMatching {
    #[default]
    Linear,
    Nearest,
}

/// Radial forward model used by the misfit and the QoI.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationSetup {
    pub n_cells: usize,
    /// `d - 1` for a `d`-dimensional radially symmetric tumor.
    pub measure_exponent: u32,
    pub steepness: f64,
    pub matching: TimeMatching,
    #[serde(skip)]
    pub stepper: StepperConfig,
}

impl Default for SimulationSetup {
    fn default() -> Self {
        Self {
            n_cells: 128,
            measure_exponent: 1,
            steepness: 200.0,
            matching: TimeMatching::Linear,
            stepper: StepperConfig {
                dt: 0.1,
                snapshot_interval: 0.0,
                variant: ModelVariant::NoVelocity,
                ..Default::default()
            },
        }
    }
}

impl SimulationSetup {
    /// Runs the radial model from the given initial confluence up to `t_end`.
    pub fn simulate(&self, theta: &ParameterVector, confluence_0: f64, t_end: f64) -> Result<Trajectory> {
        let mesh = Arc::new(build_radial_mesh_with_exponent(self.n_cells, DOMAIN_RADIUS, self.measure_exponent)?);
        let config = StepperConfig {
            t_end,
            snapshot_interval: 0.0,
            ..self.stepper
        };
        let mut stepper = Stepper::new(mesh.clone(), *theta, config)?;
        let init = stepper.initial_state(initial_radial_tumor(mesh, confluence_0, self.steepness)?)?;
        stepper.run(init)
    }

    /// Confluence at `days`.
    pub fn confluence_at(&self, theta: &ParameterVector, confluence_0: f64, days: &[f64]) -> Result<Vec<f64>> {
        let t_end = days.iter().copied().fold(0.0, f64::max);
        let traj = self.simulate(theta, confluence_0, t_end)?;
        Ok(days
            .iter()
            .map(|&t| match self.matching {
                TimeMatching::Linear => traj.confluence_at(t),
                TimeMatching::Nearest => {
                    let r = traj
                        .records
                        .iter()
                        .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
                        .expect("trajectory has an initial record");
                    r.confluence
                }
            })
            .collect())
    }
}

fn at_sample(theta: &ParameterVector, e: Error) -> Error {
    Error::AtSample {
        theta: theta.to_array().to_vec(),
        source: Box::new(e),
    }
}

/// Data, noise variances and forward-model settings of the misfit.
#[derive(Debug, Clone, PartialEq)]
pub struct MisfitSpec {
    pub series: Vec<ConfluenceSeries>,
    /// `variances[s][j]`: diagonal of the noise covariance.
    pub variances: Vec<Vec<f64>>,
}

/// Default observation standard deviation (confluence units).
pub const DEFAULT_NOISE_STD: f64 = 0.005;

impl Default for MisfitSpec {
    fn default() -> Self {
        Self::with_noise(load_dataset(), DEFAULT_NOISE_STD)
    }
}

impl MisfitSpec {
    pub fn with_noise(series: Vec<ConfluenceSeries>, std: f64) -> Self {
        let variances = series.iter().map(|s| vec![std * std; s.observations.len()]).collect();
        Self { series, variances }
    }

    pub fn validate(&self) -> Result<()> {
        if self.variances.len() != self.series.len()
            || self.series.iter().zip(&self.variances).any(|(s, v)| s.observations.len() != v.len())
        {
            return Err(Error::Dimension("one variance per observation is required".into()));
        }
        if self.variances.iter().flatten().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::Config("noise variances must be positive".into()));
        }
        Ok(())
    }

    /// Misfit of given model predictions (`predictions[s][j]`).
    pub fn evaluate(&self, predictions: &[Vec<f64>]) -> Result<f64> {
        self.validate()?;
        if predictions.len() != self.series.len() {
            return Err(Error::Dimension("one prediction vector per series is required".into()));
        }
        let mut total = 0.0;
        for ((s, var), q) in self.series.iter().zip(&self.variances).zip(predictions) {
            if q.len() != s.observations.len() {
                return Err(Error::Dimension("prediction length differs from the series".into()));
            }
            for (((_, d), v), q) in s.observations.iter().zip(var).zip(q) {
                total += 0.5 * (d - q).powi(2) / v;
            }
        }
        Ok(total)
    }

    /// Model predictions at every observation of every series.
    pub fn predict(&self, theta: &ParameterVector, setup: &SimulationSetup) -> Result<Vec<Vec<f64>>> {
        self.series
            .iter()
            .map(|s| setup.confluence_at(theta, s.initial_confluence, &s.days()))
            .collect()
    }
}

/// `(1/2) sum (d - Q(theta))^2 / Gamma` over all three series.
pub fn misfit(theta: &ParameterVector, spec: &MisfitSpec, setup: &SimulationSetup) -> Result<f64> {
    spec.predict(theta, setup)
        .and_then(|q| spec.evaluate(&q))
        .map_err(|e| at_sample(theta, e))
}

/// Confluence of the lowest seeding at the dataset days.
pub fn confluence_qoi_vector(theta: &ParameterVector, setup: &SimulationSetup) -> Result<Vec<f64>> {
    let series = &load_dataset()[0];
    setup
        .confluence_at(theta, series.initial_confluence, &series.days())
        .map_err(|e| at_sample(theta, e))
}

/// Time-averaged confluence at the dataset days (the scalar QoI).
pub fn confluence_qoi(theta: &ParameterVector, setup: &SimulationSetup) -> Result<f64> {
    let v = confluence_qoi_vector(theta, setup)?;
    Ok(v.iter().sum::<f64>() / v.len() as f64)
}

/// Result of a variance-based study on the confluence QoI.
#[derive(Debug, Clone, PartialEq)]
pub struct SobolStudy {
    pub aggregate: SobolResult,
    pub days: Vec<f64>,
    /// Indices per observation day (entry 0, the initial time, has no
    /// variance and is `None`).
    pub per_time: Vec<Option<SobolResult>>,
}

/// Sobol indices of the confluence QoI with `n` rows per matrix.
pub fn sobol_study(priors: &PriorSpec, setup: &SimulationSetup, n: usize, seed: u64) -> Result<SobolStudy> {
    let design = sample_matrices(n, priors, seed)?;
    let rows = design.all_rows();
    let outputs = parallel_map(&rows, |r| confluence_qoi_vector(&ParameterVector::from_slice(r)?, setup))?;
    let k = design.k();
    let block = |b: usize| outputs[b * n..(b + 1) * n].to_vec();
    let (ya, yb) = (block(0), block(1));
    let yc: Vec<Vec<Vec<f64>>> = (0..k).map(|i| block(i + 2)).collect();
    let mean = |v: &Vec<f64>| v.iter().sum::<f64>() / v.len() as f64;
    let agg = |y: &[Vec<f64>]| -> Vec<f64> { y.iter().map(mean).collect() };
    let yc_agg: Vec<Vec<f64>> = yc.iter().map(|c| agg(c)).collect();
    let aggregate = sobol_indices(&agg(&ya), &agg(&yb), &yc_agg)?;
    let per_time = per_time_indices(&ya, &yb, &yc);
    Ok(SobolStudy {
        aggregate,
        days: load_dataset()[0].days(),
        per_time,
    })
}

fn per_time_indices(ya: &[Vec<f64>], yb: &[Vec<f64>], yc: &[Vec<Vec<f64>>]) -> Vec<Option<SobolResult>> {
    let m = ya.first().map_or(0, Vec::len);
    (0..m)
        .map(|t| {
            let col = |y: &[Vec<f64>]| -> Vec<f64> { y.iter().map(|r| r[t]).collect() };
            let c: Vec<Vec<f64>> = yc.iter().map(|ci| col(ci)).collect();
            sobol_indices(&col(ya), &col(yb), &c).ok()
        })
        .collect()
}

/// Active subspace of the misfit with `n` gradient samples.
pub fn misfit_active_subspace(
    priors: &PriorSpec,
    spec: &MisfitSpec,
    setup: &SimulationSetup,
    n: usize,
    seed: u64,
    rel_step: f64,
) -> Result<ActiveSubspaceResult> {
    priors.validate()?;
    spec.validate()?;
    let f = |x: &[f64]| misfit(&ParameterVector::from_slice(x)?, spec, setup);
    active_subspace(&f, &priors.bounds, n, seed, rel_step)
}

/// [`compare_methods`] with the model parameter names.
pub fn compare_parameter_sensitivities(sobol: &SobolResult, asub: &ActiveSubspaceResult) -> Result<MethodComparison> {
    compare_methods(&PARAMETER_NAMES, sobol, asub)
}
