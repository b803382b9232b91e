#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod basis;
pub mod error;
pub mod galerkin;
pub mod image;
pub mod metrics;
pub mod phantom;
pub mod quad;
pub mod scalar;
pub mod specfun;
pub mod wave;

pub use error::{Error, Result};
pub use scalar::Real;

/// A point in the plane.
pub type Point<S> = [S; 2];

pub type Phantom64 = phantom::Phantom<f64>;
pub type Disc64 = phantom::Disc<f64>;
pub type Generator64 = basis::Generator<f64>;
pub type BasisGrid64 = basis::BasisGrid<f64>;
pub type GramKernel64 = basis::GramKernel<f64>;
pub type Sinogram64 = wave::Sinogram<f64>;
pub type DetectorGeometry64 = wave::DetectorGeometry<f64>;
pub type TimeGrid64 = wave::TimeGrid<f64>;
pub type BasisForward64 = wave::BasisForward<f64>;
pub type Raster64 = image::Raster<f64>;
pub type Image64 = image::Image<f64>;
pub type GalerkinSystem64 = galerkin::GalerkinSystem<f64>;
pub type Reconstruction64 = galerkin::Reconstruction<f64>;
