//! The nonlocal interaction `phi (J*1) - J*phi` approaches `-c Delta phi`
//! as the kernel narrows.
//!
//! cargo run --release --example nonlocal_operator

use std::sync::Arc;

use tumorsim::mesh::{Mesh, ScalarField};
use tumorsim::nonlocal::{ConvolutionOperator, Kernel};

fn main() -> tumorsim::Result<()> {
    let mesh = Arc::new(Mesh::interval(12_000, 0.0, 3.0, 0)?);
    let k = 2.0;
    let phi = ScalarField::interpolate(mesh.clone(), |x| (k * x[0]).sin());
    println!("width    max error   order");
    let mut previous: Option<f64> = None;
    for width in [0.16, 0.08, 0.04, 0.02] {
        let kernel = Kernel::gaussian_matching(1, 0.05, width)?;
        let c = kernel.gradient_coefficient();
        let op = ConvolutionOperator::new(kernel, mesh.clone())?;
        let value = op.interaction(&phi)?;
        let err = value
            .iter()
            .enumerate()
            .filter(|(i, _)| (1.0..=2.0).contains(&mesh.vertex(*i)[0]))
            .map(|(i, v)| (v - c * k * k * (k * mesh.vertex(i)[0]).sin()).abs())
            .fold(0.0, f64::max);
        let order = previous.map_or(String::new(), |p| format!("{:.2}", (p / err).log2()));
        println!("{width:<8} {err:.3e}   {order}");
        previous = Some(err);
    }
    Ok(())
}
