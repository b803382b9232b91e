//! Reconstruction errors and the stability estimate of the Galerkin solution.

use serde::{Deserialize, Serialize};

use crate::basis::{BasisGrid, GramKernel};
use crate::error::{Error, Result};
use crate::image::{Image, Raster};
use crate::phantom::Phantom;
use crate::scalar::Real;

/// `sum |f_N - f|^2 / sum |f|^2` over the raster nodes (a ratio of squared norms).
pub fn relative_l2_error<S: Real>(recon: &Image<S>, truth: &Image<S>) -> Result<S> {
    if recon.raster() != truth.raster() {
        return Err(Error::ShapeMismatch(
            "images live on different rasters".into(),
        ));
    }
    let den: S = truth.values().iter().map(|v| *v * *v).sum();
    if den == S::zero() {
        return Err(Error::InvalidParameter(
            "reference image is identically zero".into(),
        ));
    }
    let num: S = recon
        .values()
        .iter()
        .zip(truth.values())
        .map(|(a, b)| (*a - *b) * (*a - *b))
        .sum();
    Ok(num / den)
}

/// Phantom sampled on a raster.
pub fn phantom_image<S: Real>(phantom: &Phantom<S>, raster: &Raster<S>) -> Image<S> {
    Image::from_fn(*raster, |x| phantom.eval(x))
}

/// `c^T G c` for the unit-scale Gram kernel, i.e. `|sum_k c_k phi^k_{T,s}|^2`.
pub fn gram_norm_squared<S: Real>(
    grid: &BasisGrid<S>,
    kernel: &GramKernel<S>,
    c: &[S],
) -> Result<S> {
    if c.len() != grid.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} coefficients for an index set of size {}",
            c.len(),
            grid.len()
        )));
    }
    let entries = kernel.entries();
    let mut acc = S::zero();
    for (k, ck) in grid.indices().iter().zip(c) {
        for &(n, v) in &entries {
            if let Some(q) = grid.position([k[0] + n[0], k[1] + n[1]]) {
                acc += *ck * v * c[q];
            }
        }
    }
    Ok(acc)
}

/// Both sides of `|f_N^delta - f_N^0| <= sqrt(2/R) delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityGap<S> {
    pub lhs: S,
    pub rhs: S,
}

impl<S: Real> StabilityGap<S> {
    /// Whether `lhs <= factor * rhs`.
    pub fn holds(&self, factor: S) -> bool {
        self.lhs <= factor * self.rhs
    }
}

/// `lhs = sqrt(dc^T G dc)` with `dc = c_noisy - c_clean`, `rhs = sqrt(2/R) delta`.
pub fn stability_gap<S: Real>(
    c_noisy: &[S],
    c_clean: &[S],
    grid: &BasisGrid<S>,
    kernel: &GramKernel<S>,
    delta: S,
) -> Result<StabilityGap<S>> {
    if c_noisy.len() != c_clean.len() {
        return Err(Error::ShapeMismatch(format!(
            "coefficient vectors of length {} and {}",
            c_noisy.len(),
            c_clean.len()
        )));
    }
    let diff: Vec<S> = c_noisy.iter().zip(c_clean).map(|(a, b)| *a - *b).collect();
    let lhs = gram_norm_squared(grid, kernel, &diff)?
        .max(S::zero())
        .sqrt();
    let rhs = (S::lit(2.0) / grid.radius()).sqrt() * delta;
    Ok(StabilityGap { lhs, rhs })
}

/// One row of an experiment table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub method: String,
    pub noise: f64,
    pub relative_l2: f64,
    /// Raster origin, step and nodes per axis.
    pub raster: Raster<f64>,
    pub iterations: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{gram_kernel, Generator};

    #[test]
    fn relative_error_cases() {
        let raster = Raster::<f64>::new(-1.0, 0.5, 5).unwrap();
        let truth = Image::from_fn(raster, |x: [f64; 2]| x[0] * x[0] + x[1]);
        assert_eq!(relative_l2_error(&truth, &truth).unwrap(), 0.0);
        let zero = Image::zeros(raster);
        assert!((relative_l2_error(&zero, &truth).unwrap() - 1.0).abs() < 1e-15);
        let twice = Image::from_fn(raster, |x| 2.0 * (x[0] * x[0] + x[1]));
        assert!((relative_l2_error(&twice, &truth).unwrap() - 1.0).abs() < 1e-15);
        let other = Image::from_fn(raster, |x| x[0]);
        let e = relative_l2_error(&other, &truth).unwrap();
        let scaled = |img: &Image<f64>| {
            Image::from_values(raster, img.values().iter().map(|v| 7.0 * v).collect()).unwrap()
        };
        let es = relative_l2_error(&scaled(&other), &scaled(&truth)).unwrap();
        assert!((e - es).abs() < 1e-14);
        assert!(relative_l2_error(&truth, &zero).is_err());
        let moved = Image::zeros(Raster::new(-1.0, 0.5, 4).unwrap());
        assert!(relative_l2_error(&moved, &truth).is_err());
    }

    #[test]
    fn gap_is_symmetric_and_zero_on_equal_input() {
        let gen = Generator::kaiser_bessel(1, 2.0, 2.0).unwrap();
        let grid = BasisGrid::with_resolution(9, 1.0, 1.0).unwrap();
        let kernel = gram_kernel(&gen, 1.0, 101).unwrap();
        let a: Vec<f64> = (0..grid.len()).map(|i| (i as f64).sin()).collect();
        let b: Vec<f64> = (0..grid.len()).map(|i| (i as f64 * 0.3).cos()).collect();
        let same = stability_gap(&a, &a, &grid, &kernel, 0.1).unwrap();
        assert_eq!(same.lhs, 0.0);
        assert!(same.holds(1.0));
        let ab = stability_gap(&a, &b, &grid, &kernel, 0.0).unwrap();
        let ba = stability_gap(&b, &a, &grid, &kernel, 0.0).unwrap();
        assert!((ab.lhs - ba.lhs).abs() < 1e-12 && ab.lhs > 0.0);
        assert!(stability_gap(&a, &b[1..], &grid, &kernel, 0.0).is_err());
    }

    #[test]
    fn gram_norm_of_pixels_is_euclidean() {
        let grid = BasisGrid::with_resolution(7, 1.0, 1.0).unwrap();
        let kernel = gram_kernel(&Generator::Pixel, 1.0, 2).unwrap();
        let c: Vec<f64> = (0..grid.len()).map(|i| i as f64).collect();
        let e: f64 = c.iter().map(|v| v * v).sum();
        assert_eq!(gram_norm_squared(&grid, &kernel, &c).unwrap(), e);
    }
}
