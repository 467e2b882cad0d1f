//! One Darcy-Forchheimer-Brinkman solve driven by an elliptic tumor, with
//! and without the Forchheimer drag.
//!
//! cargo run --release --example velocity_solve -- [h]

use std::sync::Arc;

use tumorsim::mesh::{build_disk_mesh, ScalarField, DOMAIN_RADIUS};
use tumorsim::model::{DoubleWellPotential, MobilityModel, ParameterVector};
use tumorsim::velocity::{divergence_residual, solve_dfb_step, BdmSpace, DfbCoefficients, PicardSettings, VectorField};

fn main() -> tumorsim::Result<()> {
    let h: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.02);
    let mesh = Arc::new(build_disk_mesh(h, DOMAIN_RADIUS)?);
    let space = Arc::new(BdmSpace::new(mesh.clone())?);
    println!("{} cells, {} velocity dofs", mesh.n_cells(), space.n_dofs());

    let params = ParameterVector::default();
    let psi = DoubleWellPotential::new(params.e_bar);
    let phi = ScalarField::interpolate(mesh.clone(), |x| {
        let d = ((x[0] / 0.12).powi(2) + (x[1] / 0.05).powi(2)).sqrt() - 1.0;
        0.5 * (1.0 - (d / 0.2).tanh())
    });
    let sigma = phi.map(|p| 1.0 - 0.5 * p);
    let mu = ScalarField::new(
        mesh.clone(),
        phi.values()
            .iter()
            .zip(sigma.values())
            .map(|(&p, &s)| psi.first_derivative(p) - params.chi_0 * s)
            .collect(),
    )?;
    let coeffs = DfbCoefficients {
        phi_t: &phi,
        mu: &mu,
        phi_sigma: &sigma,
    };
    let settings = PicardSettings {
        tol: 1e-10,
        max_iter: 100,
    };

    for (label, p) in [("Brinkman", params.without_forchheimer()), ("Forchheimer", params)] {
        let rest = VectorField::zero(mesh.clone());
        let sol = solve_dfb_step(space.clone(), &rest, coeffs, &p, &MobilityModel::constant(&p), 0.05, settings)?;
        println!(
            "{label:<12} |v| = {:.4e}  divergence residual = {:.1e}  Picard iterations = {}",
            sol.velocity.l2_norm(),
            divergence_residual(&sol.velocity),
            sol.picard_iterations
        );
    }
    Ok(())
}
