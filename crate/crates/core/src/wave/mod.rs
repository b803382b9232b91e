//! The forward operator `W f = d/dt A_t M f` on a circular detector array,
//! the data inner product, and noise.

pub mod data;
pub mod forward;
pub mod means;

pub use data::{
    add_noise, add_noise_with, t_inner, DetectorGeometry, NoiseModel, Sinogram, TimeGrid,
};
pub use forward::{forward_phantom, BasisForward, PixelForward, RadialWaveTable, WaveQuadrature};
pub use means::{abel_transform, spherical_mean_numeric, time_derivative, AbelKernel};
