//! Div-conforming velocity and piecewise-constant pressure.

mod field;
mod solver;
mod space;

pub use field::{PressureField, VectorField};
pub use solver::{
    divergence_residual, solve_dfb_step, DfbCoefficients, DfbSolution, DfbSolver, PicardSettings,
};
pub use space::{BdmSpace, LocalBasis};
