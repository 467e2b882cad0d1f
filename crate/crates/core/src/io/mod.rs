//! Configuration, the embedded dataset, CSV and mesh files, contour
//! metrics and the command-line interface.

mod cli;
mod config;
mod contour;
mod dataset;
mod mesh_text;
mod tables;

pub use cli::cli_main;
pub use config::{
    parse_config, InitialCondition, KernelSettings, MeshKind, MeshSettings, ModelSection, PriorTable, RunConfig,
    SensitivitySettings,
};
pub use contour::{contour_metrics, isoperimetric_ratio, ContourMetrics};
pub use dataset::{load_dataset, ConfluenceSeries, DAYS};
pub use mesh_text::{mesh_from_text, mesh_to_text, read_mesh, write_mesh};
pub use tables::{
    format_float, read_activity, read_snapshot, read_sobol, write_activity, write_comparison, write_eigenpairs,
    write_field, write_fit, write_series, write_snapshot, write_sobol, write_sobol_per_time, write_text,
    write_trajectory, write_velocity, Snapshot, ACTIVITY_HEADER, SOBOL_HEADER, TRAJECTORY_HEADER, VELOCITY_HEADER,
};
