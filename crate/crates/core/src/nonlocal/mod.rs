//! Nonlocal interaction kernels and the nonlocal chemical potential.

mod convolution;
mod kernel;

pub use convolution::{
    check_kernel, convolve, convolve_at, nonlocal_mu, nonlocal_mu_with, ConvolutionOperator,
};
pub use kernel::{Kernel, KernelKind};
