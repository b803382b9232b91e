//! Circular means, the Abel transform `A_t`, and time differentiation.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::wave::TimeGrid;
use crate::Point;

/// `(1/2pi) int_{S^1} f(z + r w) ds(w)` by the `n_phi`-node periodic trapezoid rule.
pub fn spherical_mean_numeric<S: Real>(
    f: impl Fn(Point<S>) -> S,
    z: Point<S>,
    r: S,
    n_phi: usize,
) -> S {
    if r == S::zero() {
        return f(z);
    }
    let n = n_phi.max(4);
    let step = S::lit(2.0) * S::PI() / S::from_usize_lossy(n);
    let mut acc = S::zero();
    for k in 0..n {
        let a = step * S::from_usize_lossy(k);
        acc += f([z[0] + r * a.cos(), z[1] + r * a.sin()]);
    }
    acc / S::from_usize_lossy(n)
}

/// `int_0^t r g(r) / sqrt(t^2 - r^2) dr`, rewritten as `int_0^t g(sqrt(t^2 - u^2)) du`
/// and evaluated by the `n_u`-node trapezoid rule.
pub fn abel_transform<S: Real>(g: impl Fn(S) -> S, t: S, n_u: usize) -> S {
    if t <= S::zero() {
        return S::zero();
    }
    let n = n_u.max(2);
    let h = t / S::from_usize_lossy(n - 1);
    let mut acc = S::zero();
    for k in 0..n {
        let u = h * S::from_usize_lossy(k);
        let r = (t * t - u * u).max(S::zero()).sqrt();
        let w = if k == 0 || k == n - 1 {
            S::lit(0.5)
        } else {
            S::one()
        };
        acc += w * g(r);
    }
    acc * h
}

/// Central differences with second-order one-sided stencils at both ends.
pub fn time_derivative<S: Real>(values: &[S], step: S) -> Vec<S> {
    let n = values.len();
    let mut out = vec![S::zero(); n];
    if n < 3 {
        return out;
    }
    let inv = S::one() / (S::lit(2.0) * step);
    out[0] = (S::lit(-3.0) * values[0] + S::lit(4.0) * values[1] - values[2]) * inv;
    for j in 1..n - 1 {
        out[j] = (values[j + 1] - values[j - 1]) * inv;
    }
    out[n - 1] = (S::lit(3.0) * values[n - 1] - S::lit(4.0) * values[n - 2] + values[n - 3]) * inv;
    out
}

/// Exact Abel transform at time `t` of the piecewise-linear interpolant of
/// samples on `r_g = g * step`, written as weights on the samples.
fn abel_weights<S: Real>(t: S, step: S, out: &mut [S]) {
    out.iter_mut().for_each(|w| *w = S::zero());
    let nodes = out.len();
    let half = S::lit(0.5);
    let t2 = t * t;
    // Antiderivatives of r / sqrt(t^2 - r^2) and r^2 / sqrt(t^2 - r^2).
    let root = |r: S| (t2 - r * r).max(S::zero()).sqrt();
    let f1 = |r: S| half * (t2 * (r / t).min(S::one()).asin() - r * root(r));
    for g in 0..nodes.saturating_sub(1) {
        let r0 = step * S::from_usize_lossy(g);
        if r0 >= t {
            break;
        }
        let r1 = step * S::from_usize_lossy(g + 1);
        let hi = r1.min(t);
        let i0 = (hi * hi - r0 * r0) / (root(r0) + root(hi));
        let i1 = f1(hi) - f1(r0);
        out[g] += (r1 * i0 - i1) / step;
        out[g + 1] += (i1 - r0 * i0) / step;
    }
}

/// Combined operator `profile -> d/dt A_t profile` at the sampling times, for
/// profiles sampled on a uniform radius grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AbelKernel<S> {
    step: S,
    nodes: usize,
    rows: usize,
    matrix: Vec<S>,
}

impl<S: Real> AbelKernel<S> {
    /// Kernel for radii `g * step`, `g = 0..nodes`.
    pub fn new(step: S, nodes: usize, time: &TimeGrid<S>) -> Result<Self> {
        if !(step > S::zero()) || nodes < 2 {
            return Err(Error::InvalidParameter(format!(
                "radius grid needs a positive step and two nodes, got step={step}, nodes={nodes}"
            )));
        }
        let rows = time.count();
        let mut abel = vec![S::zero(); rows * nodes];
        for j in 0..rows {
            abel_weights(time.time(j), step, &mut abel[j * nodes..(j + 1) * nodes]);
        }
        let inv = S::one() / (S::lit(2.0) * time.step());
        let mut matrix = vec![S::zero(); rows * nodes];
        let row = |j: usize| &abel[j * nodes..(j + 1) * nodes];
        for j in 0..rows {
            let (terms, idx): ([S; 3], [usize; 3]) = if j == 0 {
                ([S::lit(-3.0), S::lit(4.0), S::lit(-1.0)], [0, 1, 2])
            } else if j == rows - 1 {
                ([S::lit(3.0), S::lit(-4.0), S::one()], [j, j - 1, j - 2])
            } else {
                ([S::one(), -S::one(), S::zero()], [j + 1, j - 1, j])
            };
            let out = &mut matrix[j * nodes..(j + 1) * nodes];
            for (c, &src) in terms.iter().zip(&idx) {
                if *c == S::zero() {
                    continue;
                }
                for (o, a) in out.iter_mut().zip(row(src)) {
                    *o += *c * inv * *a;
                }
            }
        }
        Ok(AbelKernel {
            step,
            nodes,
            rows,
            matrix,
        })
    }

    /// Kernel whose radius grid spans `[0, T]` with spacing at most `max_step`.
    pub fn covering(max_step: S, time: &TimeGrid<S>) -> Result<Self> {
        let intervals = (time.t_final() / max_step)
            .ceil()
            .to_usize()
            .unwrap_or(0)
            .max(1);
        let step = time.t_final() / S::from_usize_lossy(intervals);
        Self::new(step, intervals + 1, time)
    }

    pub fn step(&self) -> S {
        self.step
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn radius(&self, g: usize) -> S {
        self.step * S::from_usize_lossy(g)
    }

    /// Node range covering `[lo, hi]`, clipped to the grid; empty when disjoint.
    pub fn band(&self, lo: S, hi: S) -> std::ops::Range<usize> {
        let last = self.nodes - 1;
        let a = (lo / self.step).floor().max(S::zero());
        let b = (hi / self.step).ceil();
        if b < S::zero() || a > S::from_usize_lossy(last) {
            return 0..0;
        }
        let a = a.to_usize().unwrap_or(0);
        let b = b.to_usize().unwrap_or(last).min(last);
        a..b + 1
    }

    /// Weight row for sample `j`.
    pub fn row(&self, j: usize) -> &[S] {
        &self.matrix[j * self.nodes..(j + 1) * self.nodes]
    }

    /// Adds `K[:, start..start+len] * values` to `out`.
    pub fn apply_band(&self, start: usize, values: &[S], out: &mut [S]) {
        for (j, o) in out.iter_mut().enumerate().take(self.rows) {
            let row = &self.row(j)[start..start + values.len()];
            let mut acc = S::zero();
            for (k, v) in row.iter().zip(values) {
                acc += *k * *v;
            }
            *o += acc;
        }
    }

    pub fn apply(&self, profile: &[S]) -> Vec<S> {
        let mut out = vec![S::zero(); self.rows];
        self.apply_band(0, profile, &mut out);
        out
    }

    /// `K^T y`.
    pub fn transpose(&self, y: &[S]) -> Vec<S> {
        let mut out = vec![S::zero(); self.nodes];
        for (j, &yj) in y.iter().enumerate().take(self.rows) {
            if yj == S::zero() {
                continue;
            }
            for (o, k) in out.iter_mut().zip(self.row(j)) {
                *o += *k * yj;
            }
        }
        out
    }
}

/// Circular mean of a radial function `psi(|x - c|^2)` supported on `|x - c| <= support`,
/// over the circle of radius `r` about a point at distance `rho` from `c`.
/// Gauss-Legendre nodes on `[-1, 1]` are mapped onto the arc inside the support.
pub fn radial_circular_mean<S: Real>(
    psi: impl Fn(S) -> S,
    support: S,
    rho: S,
    r: S,
    nodes: &[S],
    weights: &[S],
) -> S {
    if r >= rho + support || rho >= r + support {
        return S::zero();
    }
    if rho == S::zero() || r == S::zero() {
        return psi(rho * rho + r * r);
    }
    let c0 = (rho * rho + r * r - support * support) / (S::lit(2.0) * rho * r);
    let theta_max = if c0 <= -S::one() {
        S::PI()
    } else if c0 >= S::one() {
        return S::zero();
    } else {
        c0.acos()
    };
    let half = theta_max * S::lit(0.5);
    let mut acc = S::zero();
    for (x, w) in nodes.iter().zip(weights) {
        let theta = half * (*x + S::one());
        let q = rho * rho + r * r - S::lit(2.0) * rho * r * theta.cos();
        acc += *w * psi(q);
    }
    acc * half / S::PI()
}

/// Fraction of the circle of radius `r` about `z` lying in the box `[x0, x1) x [y0, y1)`.
pub fn box_arc_fraction<S: Real>(z: Point<S>, r: S, x0: S, x1: S, y0: S, y1: S) -> S {
    if r == S::zero() {
        let inside = z[0] >= x0 && z[0] < x1 && z[1] >= y0 && z[1] < y1;
        return if inside { S::one() } else { S::zero() };
    }
    // Angles with cos in [lo, hi] form {alpha <= |theta| <= beta}.
    let cos_set = |lo: S, hi: S| -> Option<(S, S)> {
        if lo > S::one() || hi < -S::one() || lo > hi {
            return None;
        }
        let alpha = hi.min(S::one()).acos();
        let beta = lo.max(-S::one()).acos();
        Some((alpha, beta))
    };
    let Some((ax, bx)) = cos_set((x0 - z[0]) / r, (x1 - z[0]) / r) else {
        return S::zero();
    };
    let Some((ay, by)) = cos_set((y0 - z[1]) / r, (y1 - z[1]) / r) else {
        return S::zero();
    };
    let two_pi = S::lit(2.0) * S::PI();
    let half_pi = S::FRAC_PI_2();
    let xs = [(ax, bx), (-bx, -ax)];
    // sin(theta) = cos(theta - pi/2): shift the same construction by pi/2.
    let ys = [(ay + half_pi, by + half_pi), (half_pi - by, half_pi - ay)];
    let mut total = S::zero();
    for &(a0, a1) in &xs {
        for &(b0, b1) in &ys {
            for shift in [-two_pi, S::zero(), two_pi] {
                let lo = a0.max(b0 + shift);
                let hi = a1.min(b1 + shift);
                if hi > lo {
                    total += hi - lo;
                }
            }
        }
    }
    // A full-circle x-set is stored as two touching arcs; cap rounding.
    (total / two_pi).min(S::one())
}
