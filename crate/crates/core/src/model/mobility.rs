use std::fmt;
use std::sync::Arc;

use super::params::ParameterVector;

/// A bounded scalar coefficient of `(phi_T, phi_sigma)`.
#[derive(Clone)]
pub enum Coefficient {
    Constant(f64),
    Function(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl Coefficient {
    pub fn eval(&self, phi_t: f64, phi_sigma: f64) -> f64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Function(f) => f(phi_t, phi_sigma),
        }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            Coefficient::Constant(c) => Some(*c),
            Coefficient::Function(_) => None,
        }
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Constant(c) => write!(f, "Constant({c})"),
            Coefficient::Function(_) => write!(f, "Function(..)"),
        }
    }
}

/// Tumor mobility, nutrient mobility and viscosity with the declared
/// bounds `m_0 <= m <= m_inf`.
#[derive(Debug, Clone)]
pub struct MobilityModel {
    pub tumor: Coefficient,
    pub nutrient: Coefficient,
    pub viscosity: Coefficient,
    pub lower: f64,
    pub upper: f64,
}

impl MobilityModel {
    /// Constant mobilities taken from the parameter vector. The bounds are
    /// the smallest and largest of the three constants.
    pub fn constant(params: &ParameterVector) -> Self {
        let values = [params.m_t, params.m_sigma, params.nu];
        let lower = values.iter().copied().fold(f64::INFINITY, f64::min);
        let upper = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self {
            tumor: Coefficient::Constant(params.m_t),
            nutrient: Coefficient::Constant(params.m_sigma),
            viscosity: Coefficient::Constant(params.nu),
            lower,
            upper,
        }
    }

    pub fn with_bounds(
        tumor: Coefficient,
        nutrient: Coefficient,
        viscosity: Coefficient,
        lower: f64,
        upper: f64,
    ) -> Self {
        Self {
            tumor,
            nutrient,
            viscosity,
            lower,
            upper,
        }
    }

    pub fn tumor(&self, phi_t: f64, phi_sigma: f64) -> f64 {
        self.tumor.eval(phi_t, phi_sigma)
    }

    pub fn nutrient(&self, phi_t: f64, phi_sigma: f64) -> f64 {
        self.nutrient.eval(phi_t, phi_sigma)
    }

    pub fn viscosity(&self, phi_t: f64, phi_sigma: f64) -> f64 {
        self.viscosity.eval(phi_t, phi_sigma)
    }
}
