//! Shift-invariant approximation diagnostics built on lattice sums
//! `sum_k |phi_hat(xi + 2 pi k / s)|^2`.

use crate::basis::Generator;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::Point;

/// Lattice sums of the Kaiser-Bessel transform are truncated to `|k|_inf <= 64`.
pub const LATTICE_CUTOFF: i64 = 64;

/// Allowed tail of a truncated lattice sum relative to the full sum.
const TAIL_TOLERANCE: f64 = 1e-8;

const DENOMINATOR_FLOOR: f64 = 1e-300;

/// Direct lattice sum over `|k|_inf <= cutoff` and the contribution of the outermost shell.
pub fn lattice_sum_direct<S: Real>(
    generator: &Generator<S>,
    s: S,
    xi: Point<S>,
    cutoff: i64,
) -> (S, S) {
    let step = S::lit(2.0) * S::PI() / s;
    let mut total = S::zero();
    let mut shell = S::zero();
    for k2 in -cutoff..=cutoff {
        let y = xi[1] + step * S::from_i64_lossy(k2);
        for k1 in -cutoff..=cutoff {
            let v = generator.eval_hat([xi[0] + step * S::from_i64_lossy(k1), y]);
            let v2 = v * v;
            total += v2;
            if k1.abs() == cutoff || k2.abs() == cutoff {
                shell += v2;
            }
        }
    }
    (total, shell)
}

/// Autocorrelation of the 1-D factor of a separable generator.
fn autocorrelation_1d<S: Real>(generator: &Generator<S>, y: S) -> S {
    let y = y.abs();
    match generator {
        Generator::Pixel => (S::one() - y).max(S::zero()),
        Generator::Bilinear => {
            if y <= S::one() {
                S::lit(2.0 / 3.0) - y * y + S::lit(0.5) * y * y * y
            } else if y < S::lit(2.0) {
                let u = S::lit(2.0) - y;
                u * u * u / S::lit(6.0)
            } else {
                S::zero()
            }
        }
        Generator::KaiserBessel(_) => unreachable!("Kaiser-Bessel is not separable"),
    }
}

/// `sum_k g(x + 2 pi k / s)^2` for the unnormalized 1-D factor `g`, in its
/// dual form `s * sum_n a(s n) cos(s n x)`.
fn lattice_sum_1d<S: Real>(generator: &Generator<S>, s: S, x: S) -> S {
    let reach = S::lit(2.0) * generator.support_half_width();
    let mut acc = autocorrelation_1d(generator, S::zero());
    let mut n = 1i64;
    loop {
        let y = s * S::from_i64_lossy(n);
        if y >= reach {
            break;
        }
        acc += S::lit(2.0) * autocorrelation_1d(generator, y) * (y * x).cos();
        n += 1;
    }
    s * acc
}

/// `sum_{k in Z^2} |phi_hat(xi + 2 pi k / s)|^2`.
///
/// Separable generators use the exact dual form. The Kaiser-Bessel sum is
/// truncated at [`LATTICE_CUTOFF`] and logs a warning when the estimated tail
/// exceeds the tolerance.
pub fn lattice_sum<S: Real>(generator: &Generator<S>, s: S, xi: Point<S>) -> S {
    match generator {
        Generator::KaiserBessel(_) => {
            let (total, shell) = lattice_sum_direct(generator, s, xi, LATTICE_CUTOFF);
            check_tail(generator, total, shell);
            total
        }
        _ => {
            let inv = S::FRAC_1_PI() * S::lit(0.5);
            inv * inv * lattice_sum_1d(generator, s, xi[0]) * lattice_sum_1d(generator, s, xi[1])
        }
    }
}

static TAIL_WARNING: std::sync::Once = std::sync::Once::new();

fn check_tail<S: Real>(generator: &Generator<S>, total: S, shell: S) {
    // Shells decay like K^{1 - 2p}, so the remainder is about shell * K / (2p - 2).
    let p = generator.decay_exponent();
    let k = S::from_i64_lossy(LATTICE_CUTOFF);
    let tail = shell * k / (S::lit(2.0) * p - S::lit(2.0));
    if tail > S::lit(TAIL_TOLERANCE) * total {
        let rel = (tail / total).as_f64();
        TAIL_WARNING.call_once(|| {
            log::warn!(
                "lattice sum truncated at |k| <= {LATTICE_CUTOFF} has estimated relative tail {rel:.2e} \
                 (repeats are logged at debug level)"
            )
        });
        log::debug!("lattice sum truncated at |k| <= {LATTICE_CUTOFF} has estimated relative tail {rel:.2e}");
    }
}

fn checked_sum<S: Real>(generator: &Generator<S>, s: S, xi: Point<S>) -> Result<S> {
    let sum = lattice_sum(generator, s, xi);
    if !(sum.as_f64() >= DENOMINATOR_FLOOR) {
        return Err(Error::DegenerateLatticeSum {
            value: sum.as_f64(),
        });
    }
    Ok(sum)
}

/// `E_phi(s, T xi) = 1 - |phi_hat(T xi)|^2 / sum_k |phi_hat(T xi + 2 pi k / s)|^2`.
pub fn error_kernel<S: Real>(generator: &Generator<S>, s: S, t: S, xi: Point<S>) -> Result<S> {
    let eta = [t * xi[0], t * xi[1]];
    let sum = checked_sum(generator, s, eta)?;
    let h = generator.eval_hat(eta);
    Ok((S::one() - h * h / sum).max(S::zero()).min(S::one()))
}

/// Evaluates `f(i, j)` on an `n x n` grid symmetric under `i -> n-1-i`,
/// `j -> n-1-j`, and `i <-> j`, computing each orbit once.
fn symmetric_grid<S: Real>(
    n: usize,
    mut f: impl FnMut(usize, usize) -> Result<S>,
) -> Result<Vec<S>> {
    let fold = |i: usize| i.min(n - 1 - i);
    let half = n.div_ceil(2);
    let mut cache = vec![None; half * half];
    let mut out = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let (a, b) = (fold(i), fold(j));
            let (a, b) = (a.min(b), a.max(b));
            let slot = b * half + a;
            let v = match cache[slot] {
                Some(v) => v,
                None => {
                    let v = f(a, b)?;
                    cache[slot] = Some(v);
                    v
                }
            };
            out.push(v);
        }
    }
    Ok(out)
}

fn trapezoid_weight(i: usize, n: usize) -> f64 {
    if i == 0 || i == n - 1 {
        0.5
    } else {
        1.0
    }
}

/// Main term of the approximation error,
/// `[int_{|xi_j| <= pi/(T s)} |f_hat(xi)|^2 E_phi(s, T xi) dxi]^{1/2}`,
/// by the tensor trapezoid rule with `n` nodes per axis.
pub fn approx_error_main<S: Real>(
    generator: &Generator<S>,
    s: S,
    t: S,
    fhat_sq: impl Fn(Point<S>) -> S,
    n: usize,
) -> Result<S> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "quadrature needs at least 2 nodes per axis, got {n}"
        )));
    }
    let l = S::PI() / (t * s);
    let step = S::lit(2.0) * l / S::from_usize_lossy(n - 1);
    let node = |i: usize| -l + step * S::from_usize_lossy(i);
    let kernel = symmetric_grid(n, |i, j| error_kernel(generator, s, t, [node(i), node(j)]))?;
    let mut acc = S::zero();
    for j in 0..n {
        for i in 0..n {
            let w = S::lit(trapezoid_weight(i, n) * trapezoid_weight(j, n));
            acc += w * fhat_sq([node(i), node(j)]) * kernel[j * n + i];
        }
    }
    Ok((acc * step * step).max(S::zero()).sqrt())
}

/// Estimated Riesz bounds `(A, B)`: extremes of `(2 pi)^2 s^{-2} sum_k |phi_hat(xi + 2 pi k/s)|^2`
/// over an `n x n` grid on `[0, 2 pi / s]^2`.
pub fn riesz_bounds<S: Real>(generator: &Generator<S>, s: S, n: usize) -> Result<(S, S)> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "Riesz sampling needs at least 2 nodes per axis, got {n}"
        )));
    }
    let period = S::lit(2.0) * S::PI() / s;
    let step = period / S::from_usize_lossy(n - 1);
    let scale = (S::lit(2.0) * S::PI() / s).powi(2);
    let values = symmetric_grid(n, |i, j| {
        let xi = [step * S::from_usize_lossy(i), step * S::from_usize_lossy(j)];
        Ok(scale * lattice_sum(generator, s, xi))
    })?;
    let lo = values.iter().copied().fold(S::infinity(), S::min);
    let hi = values.iter().copied().fold(S::neg_infinity(), S::max);
    Ok((lo, hi))
}

/// Transform of the orthonormalized generator,
/// `theta_hat = s phi_hat / (2 pi sqrt(sum_k |phi_hat(xi + 2 pi k/s)|^2))`.
pub fn orthonormalized_hat<S: Real>(generator: &Generator<S>, s: S, xi: Point<S>) -> Result<S> {
    let sum = checked_sum(generator, s, xi)?;
    Ok(s * generator.eval_hat(xi) / (S::lit(2.0) * S::PI() * sum.sqrt()))
}

/// Largest relative deviation of `sum_m phi(x - m s)` from `2 pi phi_hat(0) / s^2`
/// over an `n x n` sample of `[0, s]^2`.
pub fn partition_of_unity_defect<S: Real>(generator: &Generator<S>, s: S, n: usize) -> Result<S> {
    let target = S::lit(2.0) * S::PI() * generator.eval_hat([S::zero(), S::zero()]) / (s * s);
    if target == S::zero() {
        return Err(Error::InvalidParameter(
            "partition of unity undefined for phi_hat(0) = 0".into(),
        ));
    }
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "sampling needs at least 2 nodes per axis, got {n}"
        )));
    }
    let h = generator.support_half_width();
    let range = |v: S| {
        let lo = ((v - h) / s).floor().to_i64().unwrap_or(0);
        let hi = ((v + h) / s).ceil().to_i64().unwrap_or(0);
        lo..=hi
    };
    let step = s / S::from_usize_lossy(n - 1);
    let mut worst = S::zero();
    for j in 0..n {
        let y = step * S::from_usize_lossy(j);
        for i in 0..n {
            let x = step * S::from_usize_lossy(i);
            let mut acc = S::zero();
            for m2 in range(y) {
                for m1 in range(x) {
                    acc += generator
                        .eval([x - s * S::from_i64_lossy(m1), y - s * S::from_i64_lossy(m2)]);
                }
            }
            worst = worst.max(((acc - target) / target).abs());
        }
    }
    Ok(worst)
}

/// Saturation error `A_{phi,s} = sum_{k != 0} |phi_hat(2 pi k/s)|^2 / sum_k |phi_hat(2 pi k/s)|^2`.
pub fn saturation_error<S: Real>(generator: &Generator<S>, s: S) -> S {
    let origin = [S::zero(), S::zero()];
    let h0 = generator.eval_hat(origin);
    let central = h0 * h0;
    let (total, rest) = match generator {
        Generator::KaiserBessel(_) => {
            let (total, shell) = lattice_sum_direct(generator, s, origin, LATTICE_CUTOFF);
            check_tail(generator, total, shell);
            (total, total - central)
        }
        _ => {
            let total = lattice_sum(generator, s, origin);
            (total, total - central)
        }
    };
    (rest / total).max(S::zero())
}
