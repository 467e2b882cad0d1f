//! Variance-based (Sobol) and active-subspace sensitivity analysis of the
//! radial model against the confluence data.

mod active;
mod misfit;
mod pool;
mod priors;
mod sobol;

pub use active::{
    active_subspace, active_subspace_from_gradients, compare_methods, compare_scores, gradient_fd,
    ActiveSubspaceResult, MethodComparison, DEFAULT_REL_STEP,
};
pub use misfit::{
    compare_parameter_sensitivities, confluence_qoi, confluence_qoi_vector, misfit,
    misfit_active_subspace, sobol_study, MisfitSpec, SimulationSetup, SobolStudy, TimeMatching,
    DEFAULT_NOISE_STD,
};
pub use pool::{parallel_map, worker_count, WORKERS_ENV};
pub use priors::{sample_box, sample_matrices, sample_points, PriorSpec, SampleMatrices};
pub use sobol::{sobol_indices, sobol_indices_vector, SobolResult};
