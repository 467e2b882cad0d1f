//! Convex-splitting time stepping with an inner Gauss-Seidel loop.

mod config;
mod scheme;
mod state;

pub use config::{ModelVariant, StepperConfig};
pub use scheme::{default_kernel, run, step, StepReport, Stepper, Trajectory, TrajectoryRecord};
pub use state::{
    confluence, field_confluence, ginzburg_landau_energy, initial_2d_tumor, initial_radial_tumor,
    nonlocal_energy, FieldState, TumorShape, REFERENCE_CONFLUENCE,
};
