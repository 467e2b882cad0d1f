use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{
    assemble_mass, assemble_stiffness, check_mesh, lumped_mass, solve, FormCoefficient, Mesh,
    ScalarField, DOMAIN_RADIUS,
};
use crate::model::{DoubleWellPotential, ParameterVector};
use crate::nonlocal::ConvolutionOperator;
use crate::velocity::{PressureField, VectorField};

/// The discrete unknowns at one time level.
#[derive(Debug, Clone)]
pub struct FieldState {
    pub time: f64,
    pub phi_t: ScalarField,
    pub mu: ScalarField,
    pub phi_sigma: ScalarField,
    pub velocity: VectorField,
    pub pressure: PressureField,
}

impl FieldState {
    /// State at `t = 0` with zero velocity and pressure. `mu` is the L2
    /// projection of the local chemical potential of `phi_t`.
    pub fn new(phi_t: ScalarField, phi_sigma: ScalarField, params: &ParameterVector) -> Result<Self> {
        let mesh = phi_t.mesh().clone();
        check_mesh(&phi_sigma, &mesh, "phi_sigma")?;
        let mu = project_potential(&phi_t, &phi_sigma, params)?;
        Ok(Self {
            time: 0.0,
            velocity: VectorField::zero(mesh.clone()),
            pressure: PressureField::zeros(mesh),
            phi_t,
            mu,
            phi_sigma,
        })
    }

    /// Tumor datum with the nutrient at its boundary value everywhere.
    pub fn with_unit_nutrient(phi_t: ScalarField, params: &ParameterVector) -> Result<Self> {
        let sigma = ScalarField::constant(phi_t.mesh().clone(), 1.0);
        Self::new(phi_t, sigma, params)
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        self.phi_t.mesh()
    }
}

/// Solves `M mu = M_L Psi'(phi) + eps^2 K phi - chi_0 M phi_sigma`.
fn project_potential(
    phi_t: &ScalarField,
    phi_sigma: &ScalarField,
    params: &ParameterVector,
) -> Result<ScalarField> {
    let mesh = phi_t.mesh();
    let m = assemble_mass(mesh, None)?;
    let k = assemble_stiffness(mesh, FormCoefficient::Constant(params.eps_t * params.eps_t))?;
    let ml = lumped_mass(mesh);
    let psi = DoubleWellPotential::new(params.e_bar);
    let kphi = k.mul_vec(phi_t.values());
    let msig = m.mul_vec(phi_sigma.values());
    let rhs: Vec<f64> = (0..mesh.n_vertices())
        .map(|i| ml[i] * psi.first_derivative(phi_t.values()[i]) + kphi[i] - params.chi_0 * msig[i])
        .collect();
    ScalarField::new(mesh.clone(), solve(&m, &rhs)?)
}

/// `(1/|Omega|) int phi_T`.
pub fn confluence(state: &FieldState) -> f64 {
    field_confluence(&state.phi_t)
}

pub fn field_confluence(phi_t: &ScalarField) -> f64 {
    phi_t.integral() / phi_t.mesh().total_measure()
}

/// `int Psi(phi_T) + eps^2/2 |grad phi_T|^2 + phi_sigma^2 / (2 delta_sigma)
/// - chi_0 phi_T phi_sigma`.
///
/// The potential is integrated with the nodal (lumped) rule, the same rule
/// the scheme uses for `Psi'`, so the convex-splitting energy law holds for
/// this discrete energy. The quadratic terms are integrated exactly.
pub fn ginzburg_landau_energy(state: &FieldState, params: &ParameterVector) -> f64 {
    local_energy(&state.phi_t, &state.phi_sigma, params)
}

pub(crate) fn local_energy(phi_t: &ScalarField, phi_sigma: &ScalarField, params: &ParameterVector) -> f64 {
    let mesh = phi_t.mesh();
    let psi = DoubleWellPotential::new(params.e_bar);
    let ml = lumped_mass(mesh);
    let (pt, ps) = (phi_t.values(), phi_sigma.values());
    let mut total: f64 = ml.iter().zip(pt).map(|(m, &p)| m * psi.value(p)).sum();
    let eps2 = params.eps_t * params.eps_t;
    for c in 0..mesh.n_cells() {
        let cell = mesh.cell_data(c);
        let nodes = cell.nodes();
        let mut g = [0.0; 2];
        for (l, &n) in nodes.iter().enumerate() {
            g[0] += pt[n] * cell.grads[l][0];
            g[1] += pt[n] * cell.grads[l][1];
        }
        let w: f64 = cell.quad.iter().map(|q| q.weight).sum();
        total += 0.5 * eps2 * w * (g[0] * g[0] + g[1] * g[1]);
        for q in &cell.quad {
            let (mut a, mut s) = (0.0, 0.0);
            for (l, &n) in nodes.iter().enumerate() {
                a += q.shape[l] * pt[n];
                s += q.shape[l] * ps[n];
            }
            total += q.weight * (s * s / (2.0 * params.delta_sigma) - params.chi_0 * a * s);
        }
    }
    total
}

/// Energy of the nonlocal model: the gradient term is replaced by
/// `(1/4) int int J(x - y) (phi(x) - phi(y))^2`, evaluated as
/// `(1/2) sum_i m_i phi_i (phi_i (J*1)_i - (J*phi)_i)`.
pub fn nonlocal_energy(state: &FieldState, params: &ParameterVector, op: &ConvolutionOperator) -> Result<f64> {
    let no_gradient = ParameterVector {
        eps_t: 0.0,
        ..*params
    };
    let base = local_energy(&state.phi_t, &state.phi_sigma, &no_gradient);
    let ml = lumped_mass(state.mesh());
    let inter = op.interaction(&state.phi_t)?;
    let pair: f64 = (0..ml.len())
        .map(|i| 0.5 * ml[i] * state.phi_t.values()[i] * inter[i])
        .sum();
    Ok(base + pair)
}

/// Smoothed disk `1 / (1 + exp(M (r - r_init)))` with
/// `r_init = R sqrt(confluence_0)`.
pub fn initial_radial_tumor(mesh: Arc<Mesh>, confluence_0: f64, steepness: f64) -> Result<ScalarField> {
    if !(confluence_0 > 0.0 && confluence_0 < 1.0) {
        return Err(Error::Argument(format!(
            "initial confluence must lie in (0, 1), got {confluence_0}"
        )));
    }
    if !(steepness > 0.0) {
        return Err(Error::Argument(format!("steepness must be positive, got {steepness}")));
    }
    let radius = if mesh.is_radial() || mesh.dim() == 2 {
        mesh.radius()
    } else {
        DOMAIN_RADIUS
    };
    let r_init = radius * confluence_0.sqrt();
    let radial = mesh.dim() == 1;
    Ok(ScalarField::interpolate(mesh, |x| {
        let r = if radial { x[0] } else { x[0].hypot(x[1]) };
        1.0 / (1.0 + (steepness * (r - r_init)).exp())
    }))
}

/// Initial tumor shapes of the disk experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TumorShape {
    /// Slightly elliptic.
    #[default]
    A,
    /// Highly elliptic.
    B,
    /// Two separated ellipses.
    C,
    /// Irregularly perturbed.
    D,
}

impl FromStr for TumorShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" | "A" => Ok(TumorShape::A),
            "b" | "B" => Ok(TumorShape::B),
            "c" | "C" => Ok(TumorShape::C),
            "d" | "D" => Ok(TumorShape::D),
            other => Err(Error::Config(format!("unknown tumor shape {other:?} (expected a, b, c or d)"))),
        }
    }
}

impl fmt::Display for TumorShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TumorShape::A => "a",
            TumorShape::B => "b",
            TumorShape::C => "c",
            TumorShape::D => "d",
        };
        f.write_str(s)
    }
}

impl TumorShape {
    /// Whether `x` lies in the initial tumor region. `r` is the reference
    /// radius `R sqrt(0.00562)`.
    pub fn contains(self, x: [f64; 2], r: f64) -> bool {
        let (x1, x2) = (x[0], x[1]);
        let r2 = r * r;
        match self {
            TumorShape::A => 0.9 * x1 * x1 + x2 * x2 <= r2,
            TumorShape::B => 0.15 * x1 * x1 + x2 * x2 <= r2,
            TumorShape::C => {
                0.9 * (x1 - 0.05).powi(2) + x2 * x2 <= r2 || 0.9 * (x1 + 0.05).powi(2) + x2 * x2 <= r2
            }
            TumorShape::D => {
                ((7.2 * x1 + 5.6 * x2).sin() + 1.0) * (4.0 * x1 - 0.2).powi(2)
                    + ((8.0 * x1).sin() + 1.0) * 64.0 * x2 * x2
                    <= 1.0
            }
        }
    }
}

/// Reference initial confluence of the disk experiments.
pub const REFERENCE_CONFLUENCE: f64 = 0.00562;

/// Nodal indicator of one of the four disk shapes.
pub fn initial_2d_tumor(mesh: Arc<Mesh>, shape: TumorShape) -> Result<ScalarField> {
    if mesh.dim() != 2 {
        return Err(Error::Dimension("disk shapes need a 2D mesh".into()));
    }
    let r = DOMAIN_RADIUS * REFERENCE_CONFLUENCE.sqrt();
    Ok(ScalarField::interpolate(mesh, |x| {
        if shape.contains(x, r) {
            1.0
        } else {
            0.0
        }
    }))
}
