//! Radially symmetric tumor growing in a well over 21 days.
//!
//! cargo run --release --example radial_growth -- [n_cells] [dt]

use std::sync::Arc;
use std::time::Instant;

use tumorsim::mesh::{build_radial_mesh, DOMAIN_RADIUS};
use tumorsim::model::ParameterVector;
use tumorsim::stepper::{initial_radial_tumor, ModelVariant, Stepper, StepperConfig, REFERENCE_CONFLUENCE};

fn main() -> tumorsim::Result<()> {
    let mut args = std::env::args().skip(1);
    let n_cells: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(512);
    let dt: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.05);

    let mesh = Arc::new(build_radial_mesh(n_cells, DOMAIN_RADIUS)?);
    let config = StepperConfig {
        dt,
        t_end: 21.0,
        snapshot_interval: 0.0,
        ..Default::default()
    }
    .with_variant(ModelVariant::NoVelocity);
    let mut stepper = Stepper::new(mesh.clone(), ParameterVector::default(), config)?;
    let initial = stepper.initial_state(initial_radial_tumor(mesh, REFERENCE_CONFLUENCE, 200.0)?)?;

    let start = Instant::now();
    let traj = stepper.run(initial)?;
    let elapsed = start.elapsed();

    println!("day  confluence");
    for day in 0..=21 {
        println!("{day:>3}  {:.6}", traj.confluence_at(day as f64));
    }
    let gs: usize = traj.records.iter().map(|r| r.gs_iterations).sum();
    println!("{} steps, {gs} inner iterations in {:.2?}", traj.records.len() - 1, elapsed);
    Ok(())
}
