//! Reference reconstructions: the filtered backprojection formula and the
//! discrete-data least-squares fit.

use crate::basis::Generator;
use crate::error::Result;
use crate::galerkin::{check_forward, dot, reconstruct_image, CgOptions, Reconstruction};
use crate::image::{Image, Raster};
use crate::scalar::Real;
use crate::wave::{time_derivative, BasisForward, Sinogram};

/// Filtered backprojection
/// `f(x) = -1/(pi R) int_{|p|=R} int_{|x-p|}^T d_t(t g(p,t)) / sqrt(t^2 - |x-p|^2) dt ds(p)`.
///
/// The inner integral is taken in `u = sqrt(t^2 - |x-p|^2)` by the trapezoid
/// rule on `2 N_t` intervals.
pub fn fbp_reconstruct<S: Real>(g: &Sinogram<S>, raster: &Raster<S>) -> Result<Image<S>> {
    let geometry = *g.geometry();
    let time = *g.time();
    let step = time.step();
    let t_final = time.t_final();
    let n_u = 2 * time.count();
    let mut filtered = Vec::with_capacity(geometry.count());
    for i in 0..geometry.count() {
        let mut h = Vec::with_capacity(time.count() + 1);
        h.push(S::zero());
        h.extend(g.row(i).iter().enumerate().map(|(j, v)| time.time(j) * *v));
        filtered.push(time_derivative(&h, step));
    }
    let detectors: Vec<_> = (0..geometry.count())
        .map(|i| geometry.detector(i))
        .collect();
    let inv_step = S::one() / step;
    let last = time.count();
    let scale = -geometry.weight() / (S::PI() * geometry.radius());
    let values = raster
        .points()
        .map(|x| {
            let mut total = S::zero();
            for (z, q) in detectors.iter().zip(&filtered) {
                let rho2 = (x[0] - z[0]).powi(2) + (x[1] - z[1]).powi(2);
                let span2 = t_final * t_final - rho2;
                if span2 <= S::zero() {
                    continue;
                }
                let du = span2.sqrt() / S::from_usize_lossy(n_u);
                let mut acc = S::zero();
                for m in 0..=n_u {
                    let u = du * S::from_usize_lossy(m);
                    let t = (rho2 + u * u).sqrt();
                    if t <= S::zero() {
                        continue;
                    }
                    let pos = t * inv_step;
                    let n = pos.floor().to_usize().unwrap_or(last).min(last - 1);
                    let f = pos - S::from_usize_lossy(n);
                    let v = (q[n] * (S::one() - f) + q[n + 1] * f) / t;
                    acc += if m == 0 || m == n_u {
                        v * S::lit(0.5)
                    } else {
                        v
                    };
                }
                total += acc * du;
            }
            total * scale
        })
        .collect();
    Image::from_values(*raster, values)
}

/// Least-squares fit `min |B c - g|^2` of the sampled basis data, solved by
/// conjugate gradients on the normal equations (CGLS).
///
/// The residual history records `|B^T (g - B c)|` relative to its initial value.
pub fn dd_reconstruct<S: Real>(
    generator: &Generator<S>,
    forward: &BasisForward<S>,
    g: &Sinogram<S>,
    options: &CgOptions,
    raster: &Raster<S>,
) -> Result<Reconstruction<S>> {
    check_forward(generator, forward)?;
    let n = forward.grid().len();
    let mut c = vec![S::zero(); n];
    let mut r = g.clone();
    let mut s = forward.transpose_apply(&r)?;
    let mut gamma = dot(&s, &s);
    let s0 = gamma.sqrt();
    let mut residuals = vec![if s0 > S::zero() { S::one() } else { S::zero() }];
    let mut iterations = 0;
    let mut converged = s0 == S::zero();
    let mut p = s.clone();
    let tol = S::lit(options.tol);
    while !converged && iterations < options.max_iter {
        iterations += 1;
        let q = forward.apply(&p)?;
        let qq = dot(q.values(), q.values());
        if !(qq > S::zero() && qq.is_finite()) {
            return Err(crate::Error::Solver(format!(
                "degenerate search direction in the data fit at iteration {iterations}"
            )));
        }
        let alpha = gamma / qq;
        for (ci, pi) in c.iter_mut().zip(&p) {
            *ci += alpha * *pi;
        }
        for (ri, qi) in r.values_mut().iter_mut().zip(q.values()) {
            *ri -= alpha * *qi;
        }
        s = forward.transpose_apply(&r)?;
        let gamma_new = dot(&s, &s);
        let rel = gamma_new.sqrt() / s0;
        if !rel.is_finite() {
            return Err(crate::Error::Solver(format!(
                "non-finite residual in the data fit at iteration {iterations}"
            )));
        }
        residuals.push(rel);
        if rel <= tol {
            converged = true;
            break;
        }
        let beta = gamma_new / gamma;
        for (pi, si) in p.iter_mut().zip(&s) {
            *pi = *si + beta * *pi;
        }
        gamma = gamma_new;
    }
    let image = reconstruct_image(generator, forward.grid(), &c, raster)?;
    Ok(Reconstruction {
        coefficients: c,
        image,
        residuals,
        iterations,
        converged,
    })
}
