//! The Galerkin equation `A_N c = d_N` and its solvers.

mod solve;
mod system;

pub(crate) use solve::dot;
pub use solve::{cg_solve, cholesky_solve, BandedCholesky, CgOptions, CgOutcome};
pub(crate) use system::check_forward;
pub use system::{
    assemble_rhs, galerkin_reconstruct, reconstruct_image, GalerkinSystem, Reconstruction,
    Solution, Solver, DENSE_LIMIT,
};
