//! Meshes, P1 fields, sparse operators and their assembly.

mod assembly;
mod field;
mod geometry;
mod sparse;

pub use assembly::{
    apply_dirichlet, assemble_convection, assemble_mass, assemble_stiffness, lumped_mass,
    FormCoefficient,
};
pub(crate) use field::check_mesh;
pub use field::ScalarField;
pub use geometry::{
    build_disk_mesh, build_radial_mesh, build_radial_mesh_with_exponent, CellData, Mesh, QuadPoint,
    DOMAIN_RADIUS,
};
pub use sparse::{solve, SparseLu, SparseMatrix, TripletBuilder};
