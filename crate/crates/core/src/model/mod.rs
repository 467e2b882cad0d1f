//! Parameters, potential, mobilities, reaction terms and assumption checks.

mod assumptions;
mod mobility;
mod params;
mod potential;
mod source;

pub use assumptions::{
    validate_assumptions, AssumptionCheck, AssumptionReport, NonlocalConstants, GROWTH_GRID,
};
pub use mobility::{Coefficient, MobilityModel};
pub use params::{ParameterVector, PARAMETER_COUNT, PARAMETER_NAMES};
pub use potential::{ConvexSplit, DoubleWellPotential};
pub use source::{cutoff, source_terms, SourceModel};
