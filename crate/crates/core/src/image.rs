//! Square evaluation rasters and images sampled on them.

use serde::{Deserialize, Serialize};

use crate::basis::BasisGrid;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::Point;

/// Nodes `x0 + i h`, `i = 0..count`, on both axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Raster<S> {
    origin: S,
    step: S,
    count: usize,
}

impl<S: Real> Raster<S> {
    pub fn new(origin: S, step: S, count: usize) -> Result<Self> {
        if !(step > S::zero() && step.is_finite() && origin.is_finite()) || count == 0 {
            return Err(Error::InvalidParameter(format!(
                "raster needs a positive step and at least one node, got h={step}, n={count}"
            )));
        }
        Ok(Raster {
            origin,
            step,
            count,
        })
    }

    /// Basis centers `T s k` that lie in `[-1, 1]^2`.
    pub fn centers(grid: &BasisGrid<S>) -> Self {
        let h = grid.spacing();
        let k = ((S::one() + S::lit(1e-9)) / h)
            .floor()
            .to_usize()
            .unwrap_or(0);
        Raster {
            origin: -h * S::from_usize_lossy(k),
            step: h,
            count: 2 * k + 1,
        }
    }

    pub fn origin(&self) -> S {
        self.origin
    }

    pub fn step(&self) -> S {
        self.step
    }

    /// Nodes per axis.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn len(&self) -> usize {
        self.count * self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn coordinate(&self, i: usize) -> S {
        self.origin + self.step * S::from_usize_lossy(i)
    }

    /// Node `(x_ix, y_iy)`.
    pub fn point(&self, ix: usize, iy: usize) -> Point<S> {
        [self.coordinate(ix), self.coordinate(iy)]
    }

    /// All nodes, `x` fastest.
    pub fn points(&self) -> impl Iterator<Item = Point<S>> + '_ {
        (0..self.count).flat_map(move |iy| (0..self.count).map(move |ix| self.point(ix, iy)))
    }
}

/// Values on a raster, `x` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Image<S> {
    raster: Raster<S>,
    values: Vec<S>,
}

impl<S: Real> Image<S> {
    pub fn zeros(raster: Raster<S>) -> Self {
        Image {
            raster,
            values: vec![S::zero(); raster.len()],
        }
    }

    pub fn from_fn(raster: Raster<S>, mut f: impl FnMut(Point<S>) -> S) -> Self {
        let values = raster.points().map(&mut f).collect();
        Image { raster, values }
    }

    pub fn from_values(raster: Raster<S>, values: Vec<S>) -> Result<Self> {
        if values.len() != raster.len() {
            return Err(Error::ShapeMismatch(format!(
                "raster has {} nodes, got {} values",
                raster.len(),
                values.len()
            )));
        }
        Ok(Image { raster, values })
    }

    pub fn raster(&self) -> &Raster<S> {
        &self.raster
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    pub fn get(&self, ix: usize, iy: usize) -> S {
        self.values[iy * self.raster.count() + ix]
    }

    /// Smallest and largest value.
    pub fn range(&self) -> (S, S) {
        self.values
            .iter()
            .fold((S::infinity(), S::neg_infinity()), |(lo, hi), v| {
                (lo.min(*v), hi.max(*v))
            })
    }
}
