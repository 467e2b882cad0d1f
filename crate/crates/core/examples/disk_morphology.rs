//! Tumor shapes on the disk: confluence and roundness of the 0.5 contour
//! over time for one model variant.
//!
//! cargo run --release --example disk_morphology -- [variant] [shape] [h] [dt] [t_end]

use std::sync::Arc;
use std::time::Instant;

use tumorsim::io::isoperimetric_ratio;
use tumorsim::mesh::{build_disk_mesh, DOMAIN_RADIUS};
use tumorsim::model::ParameterVector;
use tumorsim::stepper::{field_confluence, initial_2d_tumor, ModelVariant, Stepper, StepperConfig, TumorShape};

fn main() -> tumorsim::Result<()> {
    env_logger::init();
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, default: &str| args.get(i).cloned().unwrap_or_else(|| default.to_string());
    let variant: ModelVariant = arg(0, "III").parse()?;
    let shape: TumorShape = arg(1, "a").parse()?;
    let h: f64 = arg(2, "0.01").parse().expect("h is a number");
    let dt: f64 = arg(3, "0.05").parse().expect("dt is a number");
    let t_end: f64 = arg(4, "21").parse().expect("t_end is a number");

    let mesh = Arc::new(build_disk_mesh(h, DOMAIN_RADIUS)?);
    println!("{} vertices, {} cells", mesh.n_vertices(), mesh.n_cells());
    let config = StepperConfig {
        dt,
        t_end,
        snapshot_interval: 1.0,
        ..Default::default()
    }
    .with_variant(variant);
    let mut stepper = Stepper::new(mesh.clone(), ParameterVector::default(), config)?;
    let initial = stepper.initial_state(initial_2d_tumor(mesh, shape)?)?;

    let start = Instant::now();
    let traj = stepper.run(initial)?;
    println!("variant {variant}, shape {shape}: {:.1?}", start.elapsed());
    println!("day  confluence  roundness");
    for s in &traj.snapshots {
        let ratio = isoperimetric_ratio(&s.phi_t).map_or("-".to_string(), |r| format!("{r:.4}"));
        println!("{:>5.1}  {:.6}  {ratio}", s.time, field_confluence(&s.phi_t));
    }
    let worst = traj.records.iter().map(|r| r.divergence).fold(0.0, f64::max);
    println!("largest divergence residual: {worst:.2e}");
    Ok(())
}
