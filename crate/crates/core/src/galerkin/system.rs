use serde::{Deserialize, Serialize};

use crate::basis::{gram_kernel, BasisGrid, Generator, GramKernel, Index, DEFAULT_GRAM_RESOLUTION};
use crate::error::{Error, Result};
use crate::galerkin::solve::{cg_solve, cholesky_solve, dot, BandedCholesky, CgOptions};
use crate::image::{Image, Raster};
use crate::scalar::Real;
use crate::wave::{BasisForward, Sinogram};

/// Largest index set for which the dense matrix is formed.
pub const DENSE_LIMIT: usize = 2500;

/// How the Galerkin equation is solved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Solver {
    Cg(CgOptions),
    /// Band Cholesky factorization in the row-major index order.
    Cholesky,
    /// Dense Cholesky, limited to small index sets.
    Dense,
}

impl Default for Solver {
    fn default() -> Self {
        Solver::Cg(CgOptions::default())
    }
}

/// Coefficients and solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution<S> {
    pub coefficients: Vec<S>,
    /// Relative residuals `|A c - d| / |d|`; a single entry for direct solves.
    pub residuals: Vec<S>,
    pub iterations: usize,
    pub converged: bool,
}

/// Reconstructed coefficients together with their rasterized expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction<S> {
    pub coefficients: Vec<S>,
    pub image: Image<S>,
    pub residuals: Vec<S>,
    pub iterations: usize,
    pub converged: bool,
}

/// The system `A_N c = d_N` with `A_N[k, l] = (R/2) G[l - k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GalerkinSystem<S> {
    grid: BasisGrid<S>,
    kernel: GramKernel<S>,
    entries: Vec<(Index, S)>,
    rhs: Vec<S>,
}

pub(crate) fn check_forward<S: Real>(
    generator: &Generator<S>,
    forward: &BasisForward<S>,
) -> Result<()> {
    let ok = matches!(
        (generator, forward),
        (Generator::Pixel, BasisForward::Pixel { .. })
            | (Generator::KaiserBessel(_), BasisForward::Radial { .. })
    );
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "forward operator was not built for the {} generator",
            generator.name()
        )))
    }
}

/// `d_k = <W phi^k, g>_t`.
pub fn assemble_rhs<S: Real>(
    generator: &Generator<S>,
    forward: &BasisForward<S>,
    g: &Sinogram<S>,
) -> Result<Vec<S>> {
    check_forward(generator, forward)?;
    if forward.grid().is_empty() {
        return Err(Error::InvalidParameter("index set is empty".into()));
    }
    forward.rhs(g)
}

impl<S: Real> GalerkinSystem<S> {
    /// System from an unscaled unit-scale Gram kernel and a right-hand side.
    pub fn new(grid: BasisGrid<S>, gram: &GramKernel<S>, rhs: Vec<S>) -> Result<Self> {
        if rhs.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!(
                "right-hand side has {} entries for an index set of size {}",
                rhs.len(),
                grid.len()
            )));
        }
        let kernel = gram.scaled(grid.radius() / S::lit(2.0));
        let entries = kernel.entries();
        Ok(GalerkinSystem {
            grid,
            kernel,
            entries,
            rhs,
        })
    }

    /// Gram kernel at the default resolution and right-hand side from data `g`.
    pub fn assemble(
        generator: &Generator<S>,
        forward: &BasisForward<S>,
        g: &Sinogram<S>,
    ) -> Result<Self> {
        let rhs = assemble_rhs(generator, forward, g)?;
        let grid = forward.grid().clone();
        let gram = gram_kernel(generator, grid.s(), DEFAULT_GRAM_RESOLUTION)?;
        Self::new(grid, &gram, rhs)
    }

    pub fn grid(&self) -> &BasisGrid<S> {
        &self.grid
    }

    /// Kernel already multiplied by `R/2`.
    pub fn kernel(&self) -> &GramKernel<S> {
        &self.kernel
    }

    pub fn rhs(&self) -> &[S] {
        &self.rhs
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// `(A_N c)[k] = sum_l (R/2) G[l - k] c[l]` over the index set.
    pub fn apply(&self, c: &[S]) -> Result<Vec<S>> {
        if c.len() != self.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficients for an index set of size {}",
                c.len(),
                self.len()
            )));
        }
        let mut out = vec![S::zero(); c.len()];
        for (o, k) in out.iter_mut().zip(self.grid.indices()) {
            let mut acc = S::zero();
            for &(n, v) in &self.entries {
                if let Some(q) = self.grid.position([k[0] + n[0], k[1] + n[1]]) {
                    acc += v * c[q];
                }
            }
            *o = acc;
        }
        Ok(out)
    }

    fn entry(&self, p: usize, q: usize) -> S {
        let (a, b) = (self.grid.indices()[p], self.grid.indices()[q]);
        self.kernel.get([b[0] - a[0], b[1] - a[1]])
    }

    /// Row-major dense `A_N`.
    pub fn dense_matrix(&self) -> Result<Vec<S>> {
        let n = self.len();
        if n > DENSE_LIMIT {
            return Err(Error::InvalidParameter(format!(
                "dense matrix limited to {DENSE_LIMIT} unknowns, system has {n}"
            )));
        }
        let mut a = vec![S::zero(); n * n];
        for p in 0..n {
            for q in 0..n {
                a[p * n + q] = self.entry(p, q);
            }
        }
        Ok(a)
    }

    fn relative_residual(&self, c: &[S]) -> Result<S> {
        let ac = self.apply(c)?;
        let r: Vec<S> = ac.iter().zip(&self.rhs).map(|(a, b)| *a - *b).collect();
        let b = dot(&self.rhs, &self.rhs).sqrt();
        let r = dot(&r, &r).sqrt();
        Ok(if b > S::zero() { r / b } else { r })
    }

    fn direct(&self, coefficients: Vec<S>) -> Result<Solution<S>> {
        let res = self.relative_residual(&coefficients)?;
        Ok(Solution {
            coefficients,
            residuals: vec![res],
            iterations: 0,
            converged: true,
        })
    }

    pub fn solve(&self, solver: &Solver) -> Result<Solution<S>> {
        if self.entries.len() == 1 && self.entries[0].0 == [0, 0] {
            let d = self.entries[0].1;
            return self.direct(self.rhs.iter().map(|v| *v / d).collect());
        }
        match solver {
            Solver::Cg(options) => {
                let out = cg_solve(|p: &[S]| self.apply(p), &self.rhs, options)?;
                Ok(Solution {
                    coefficients: out.solution,
                    residuals: out.residuals,
                    iterations: out.iterations,
                    converged: out.converged,
                })
            }
            Solver::Cholesky => {
                let band = self.grid.bandwidth(self.kernel.half_width());
                let factor = BandedCholesky::factor(self.len(), band, |p, q| self.entry(p, q))?;
                self.direct(factor.solve(&self.rhs)?)
            }
            Solver::Dense => {
                let a = self.dense_matrix()?;
                self.direct(cholesky_solve(&a, self.len(), &self.rhs)?)
            }
        }
    }
}

/// `sum_k c_k phi^k_{T,s}` evaluated on a raster.
pub fn reconstruct_image<S: Real>(
    generator: &Generator<S>,
    grid: &BasisGrid<S>,
    c: &[S],
    raster: &Raster<S>,
) -> Result<Image<S>> {
    let values = raster
        .points()
        .map(|x| grid.expand(generator, c, x))
        .collect::<Result<Vec<S>>>()?;
    Image::from_values(*raster, values)
}

/// Solves the Galerkin equation for data `g` and rasterizes the result.
pub fn galerkin_reconstruct<S: Real>(
    generator: &Generator<S>,
    forward: &BasisForward<S>,
    g: &Sinogram<S>,
    solver: &Solver,
    raster: &Raster<S>,
) -> Result<Reconstruction<S>> {
    let system = GalerkinSystem::assemble(generator, forward, g)?;
    let solution = system.solve(solver)?;
    let image = reconstruct_image(generator, system.grid(), &solution.coefficients, raster)?;
    Ok(Reconstruction {
        coefficients: solution.coefficients,
        image,
        residuals: solution.residuals,
        iterations: solution.iterations,
        converged: solution.converged,
    })
}
