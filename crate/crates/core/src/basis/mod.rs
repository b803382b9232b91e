//! Generating functions, the shifted and scaled family `phi^k_{T,s}`, Gram
//! kernels, and lattice-sum diagnostics.

pub mod analysis;
pub mod generator;
pub mod gram;
pub mod grid;

pub use analysis::{
    approx_error_main, error_kernel, lattice_sum, orthonormalized_hat, partition_of_unity_defect,
    riesz_bounds, saturation_error,
};
pub use generator::{Generator, GeneratorSpec, KaiserBessel};
pub use gram::{gram_kernel, GramKernel, DEFAULT_GRAM_RESOLUTION};
pub use grid::{BasisGrid, Index};
