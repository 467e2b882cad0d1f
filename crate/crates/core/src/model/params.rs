use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of model parameters.
pub const PARAMETER_COUNT: usize = 13;

/// Parameter names in canonical order. The order is shared by the
/// sensitivity matrices, priors and every CSV writer.
pub const PARAMETER_NAMES: [&str; PARAMETER_COUNT] = [
    "eps_T",
    "chi_0",
    "delta_sigma",
    "lambda_T",
    "lambda_sigma",
    "lambda_A",
    "M_T",
    "M_sigma",
    "E_bar",
    "alpha",
    "nu",
    "F_1",
    "F_2",
];

/// The thirteen scalar model parameters.
///
/// `Default` yields the dimensionless reference values used for the
/// radial and disk experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParameterVector {
    /// Interface thickness.
    #[serde(rename = "eps_T")]
    pub eps_t: f64,
    /// Chemotaxis coefficient.
    pub chi_0: f64,
    /// Nutrient diffusion scaling.
    pub delta_sigma: f64,
    /// Proliferation rate (1/day).
    #[serde(rename = "lambda_T")]
    pub lambda_t: f64,
    /// Nutrient consumption rate (1/day).
    pub lambda_sigma: f64,
    /// Apoptosis rate (1/day).
    #[serde(rename = "lambda_A")]
    pub lambda_a: f64,
    /// Tumor mobility.
    #[serde(rename = "M_T")]
    pub m_t: f64,
    /// Nutrient mobility.
    #[serde(rename = "M_sigma")]
    pub m_sigma: f64,
    /// Double-well prefactor.
    #[serde(rename = "E_bar")]
    pub e_bar: f64,
    /// Velocity friction.
    pub alpha: f64,
    /// Viscosity.
    pub nu: f64,
    /// Quadratic Forchheimer coefficient.
    #[serde(rename = "F_1")]
    pub f1: f64,
    /// Cubic Forchheimer coefficient.
    #[serde(rename = "F_2")]
    pub f2: f64,
}

impl Default for ParameterVector {
    fn default() -> Self {
        Self {
            eps_t: 0.01,
            chi_0: 0.5,
            delta_sigma: 0.05,
            lambda_t: 1.0,
            lambda_sigma: 1.0,
            lambda_a: 0.01,
            m_t: 1.0,
            m_sigma: 1.0,
            e_bar: 0.25,
            alpha: 1.0,
            nu: 10.0,
            f1: 10.0,
            f2: 10.0,
        }
    }
}

impl ParameterVector {
    pub fn to_array(&self) -> [f64; PARAMETER_COUNT] {
        [
            self.eps_t,
            self.chi_0,
            self.delta_sigma,
            self.lambda_t,
            self.lambda_sigma,
            self.lambda_a,
            self.m_t,
            self.m_sigma,
            self.e_bar,
            self.alpha,
            self.nu,
            self.f1,
            self.f2,
        ]
    }

    pub fn from_slice(values: &[f64]) -> Result<Self> {
        if values.len() != PARAMETER_COUNT {
            return Err(Error::Dimension(format!(
                "expected {PARAMETER_COUNT} parameter values, got {}",
                values.len()
            )));
        }
        Ok(Self {
            eps_t: values[0],
            chi_0: values[1],
            delta_sigma: values[2],
            lambda_t: values[3],
            lambda_sigma: values[4],
            lambda_a: values[5],
            m_t: values[6],
            m_sigma: values[7],
            e_bar: values[8],
            alpha: values[9],
            nu: values[10],
            f1: values[11],
            f2: values[12],
        })
    }

    /// Positivity and sign constraints. Returns the offending parameter
    /// names; an empty list means the vector is admissible.
    pub fn violations(&self) -> Vec<&'static str> {
        let values = self.to_array();
        let mut bad = Vec::new();
        for (i, (&name, &v)) in PARAMETER_NAMES.iter().zip(values.iter()).enumerate() {
            let ok = match i {
                // eps_T, delta_sigma, M_T, M_sigma, E_bar, nu
                0 | 2 | 6 | 7 | 8 | 10 => v.is_finite() && v > 0.0,
                // chi_0 is a signed coupling
                1 => v.is_finite(),
                _ => v.is_finite() && v >= 0.0,
            };
            if !ok {
                bad.push(name);
            }
        }
        bad
    }

    pub fn validate(&self) -> Result<()> {
        let bad = self.violations();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "invalid parameter values: {}",
                bad.join(", ")
            )))
        }
    }

    /// The same parameters with both Forchheimer coefficients zeroed.
    pub fn without_forchheimer(mut self) -> Self {
        self.f1 = 0.0;
        self.f2 = 0.0;
        self
    }
}
