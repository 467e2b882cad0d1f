//! Double-well potential and its convex/concave energy split.

use crate::error::{Error, Result};

use super::params::ParameterVector;

/// `Psi(phi) = E_bar * phi^2 * (1 - phi)^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleWellPotential {
    pub e_bar: f64,
}

impl DoubleWellPotential {
    pub fn new(e_bar: f64) -> Self {
        Self { e_bar }
    }

    pub fn value(&self, phi: f64) -> f64 {
        let s = phi * (1.0 - phi);
        self.e_bar * s * s
    }

    pub fn first_derivative(&self, phi: f64) -> f64 {
        self.e_bar * (4.0 * phi * phi * phi - 6.0 * phi * phi + 2.0 * phi)
    }

    pub fn second_derivative(&self, phi: f64) -> f64 {
        self.e_bar * (12.0 * phi * phi - 12.0 * phi + 2.0)
    }

    /// Value, first and second derivative in one call.
    pub fn eval(&self, phi: f64) -> Result<(f64, f64, f64)> {
        if !phi.is_finite() {
            return Err(Error::Domain(format!("potential evaluated at {phi}")));
        }
        Ok((
            self.value(phi),
            self.first_derivative(phi),
            self.second_derivative(phi),
        ))
    }
}

/// `Psi = Psi_c - Psi_e` with `Psi_c = E(phi^4 - 2 phi^3 + 1.5 phi^2)` and
/// `Psi_e = 0.5 E phi^2`. Both parts are convex on the whole real line
/// (`Psi_c'' = E(12 phi^2 - 12 phi + 3) = 3E(2 phi - 1)^2`).
///
/// The gradient energy belongs to the contractive part; the chemotaxis
/// coupling `-chi_0 phi_T phi_sigma` and the nutrient quadratic belong to
/// the expansive part and are therefore always evaluated at the previous
/// time level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvexSplit {
    pub e_bar: f64,
    pub chi_0: f64,
}

impl ConvexSplit {
    pub fn new(e_bar: f64, chi_0: f64) -> Self {
        Self { e_bar, chi_0 }
    }

    pub fn from_params(params: &ParameterVector) -> Self {
        Self::new(params.e_bar, params.chi_0)
    }

    pub fn contractive(&self, phi: f64) -> f64 {
        let p2 = phi * phi;
        self.e_bar * (p2 * p2 - 2.0 * p2 * phi + 1.5 * p2)
    }

    pub fn contractive_derivative(&self, phi: f64) -> f64 {
        self.e_bar * (4.0 * phi * phi * phi - 6.0 * phi * phi + 3.0 * phi)
    }

    pub fn contractive_second_derivative(&self, phi: f64) -> f64 {
        self.e_bar * (12.0 * phi * phi - 12.0 * phi + 3.0)
    }

    pub fn expansive(&self, phi: f64) -> f64 {
        0.5 * self.e_bar * phi * phi
    }

    pub fn expansive_derivative(&self, phi: f64) -> f64 {
        self.e_bar * phi
    }

    pub fn expansive_second_derivative(&self, _phi: f64) -> f64 {
        self.e_bar
    }

    /// Local part of the discrete chemical potential:
    /// `Psi_c'(phi_new) - Psi_e'(phi_old) - chi_0 * phi_sigma_old`.
    ///
    /// `phi_sigma_new` is accepted for symmetry with the continuous
    /// `D E_c(phi, phi_sigma)` signature; the contractive part does not
    /// depend on the nutrient.
    pub fn derivative(
        &self,
        phi_new: f64,
        phi_old: f64,
        phi_sigma_new: f64,
        phi_sigma_old: f64,
    ) -> Result<f64> {
        for x in [phi_new, phi_old, phi_sigma_new, phi_sigma_old] {
            if !x.is_finite() {
                return Err(Error::Domain(format!("non-finite input {x}")));
            }
        }
        Ok(self.contractive_derivative(phi_new)
            - self.expansive_derivative(phi_old)
            - self.chi_0 * phi_sigma_old)
    }
}
