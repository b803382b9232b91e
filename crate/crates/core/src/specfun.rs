//! Special functions used by the basis formulas: `sinc`, Gamma, and the
//! Bessel functions `I_nu`, `J_nu` of real nonnegative order.
//!
//! Everything here is self-contained. `I_nu` uses its power series (all terms
//! positive, so there is no cancellation) and switches to the Hankel-type
//! asymptotic expansion for large arguments. `J_nu` uses the power series for
//! small arguments, Miller's backward recurrence normalized with the Neumann
//! sum `(x/2)^nu = sum_k (nu+2k) Gamma(nu+k)/k! J_{nu+2k}(x)` in the middle
//! range, and the Hankel asymptotic expansion for large arguments.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Above this argument `J_nu` leaves the power series for Miller's recurrence.
const J_SERIES_MAX: f64 = 8.0;
/// Base threshold for the asymptotic expansions; the effective switch point
/// is `ASYMPTOTIC_BASE + nu^2` so the expansion terms decay from the start.
const ASYMPTOTIC_BASE: f64 = 25.0;
const MAX_TERMS: usize = 1000;

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// `sin(x)/x` with the removable singularity filled in (`sinc(0) = 1`).
pub fn sinc<S: Real>(x: S) -> S {
    if x == S::zero() {
        S::one()
    } else {
        x.sin() / x
    }
}

/// Gamma function via the Lanczos approximation (g = 7, nine terms), with the
/// reflection formula below one half.
pub fn gamma<S: Real>(x: S) -> S {
    let half = S::lit(0.5);
    if x < half {
        let pi = S::PI();
        return pi / ((pi * x).sin() * gamma(S::one() - x));
    }
    let x = x - S::one();
    let mut acc = S::lit(LANCZOS_COEFFS[0]);
    for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += S::lit(c) / (x + S::from_usize_lossy(i));
    }
    let t = x + S::lit(LANCZOS_G) + half;
    (S::TAU()).sqrt() * t.powf(x + half) * (-t).exp() * acc
}

fn check_args<S: Real>(function: &'static str, nu: S, x: S) -> Result<()> {
    if !(nu >= S::zero()) || !nu.is_finite() {
        return Err(Error::Domain {
            function,
            detail: format!("order {nu} must be finite and nonnegative"),
        });
    }
    if !(x >= S::zero()) || !x.is_finite() {
        return Err(Error::Domain {
            function,
            detail: format!("argument {x} must be finite and nonnegative"),
        });
    }
    Ok(())
}

fn asymptotic_switch<S: Real>(nu: S) -> S {
    S::lit(ASYMPTOTIC_BASE) + nu * nu
}

/// Modified Bessel function of the first kind `I_nu(x)` for `nu, x >= 0`.
pub fn bessel_i<S: Real>(nu: S, x: S) -> Result<S> {
    check_args("bessel_i", nu, x)?;
    if x == S::zero() {
        return Ok(if nu == S::zero() { S::one() } else { S::zero() });
    }
    if x <= asymptotic_switch(nu) {
        Ok(bessel_i_series(nu, x))
    } else {
        Ok(bessel_i_asymptotic(nu, x))
    }
}

pub(crate) fn bessel_i_series<S: Real>(nu: S, x: S) -> S {
    let half = x * S::lit(0.5);
    let q = half * half;
    let mut term = half.powf(nu) / gamma(nu + S::one());
    let mut sum = term;
    for k in 1..MAX_TERMS {
        let kf = S::from_usize_lossy(k);
        term *= q / (kf * (kf + nu));
        sum += term;
        if term <= S::epsilon() * sum {
            break;
        }
    }
    sum
}

fn bessel_i_asymptotic<S: Real>(nu: S, x: S) -> S {
    let mu = S::lit(4.0) * nu * nu;
    let eight_x = S::lit(8.0) * x;
    let mut term = S::one();
    let mut sum = S::one();
    for k in 1..MAX_TERMS {
        let kf = S::from_usize_lossy(k);
        let odd = S::lit(2.0) * kf - S::one();
        let next = -term * (mu - odd * odd) / (kf * eight_x);
        if next.abs() >= term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() <= S::epsilon() * sum.abs() {
            break;
        }
    }
    x.exp() / (S::TAU() * x).sqrt() * sum
}

/// Bessel function of the first kind `J_nu(x)` for real `nu >= 0`, `x >= 0`.
pub fn bessel_j<S: Real>(nu: S, x: S) -> Result<S> {
    check_args("bessel_j", nu, x)?;
    if x == S::zero() {
        return Ok(if nu == S::zero() { S::one() } else { S::zero() });
    }
    if x <= S::lit(J_SERIES_MAX) {
        Ok(bessel_j_series(nu, x))
    } else if x <= asymptotic_switch(nu) {
        Ok(bessel_j_miller(nu, x))
    } else {
        Ok(bessel_j_asymptotic(nu, x))
    }
}

pub(crate) fn bessel_j_series<S: Real>(nu: S, x: S) -> S {
    let half = x * S::lit(0.5);
    let q = half * half;
    let mut term = half.powf(nu) / gamma(nu + S::one());
    let mut sum = term;
    let mut largest = term.abs();
    for k in 1..MAX_TERMS {
        let kf = S::from_usize_lossy(k);
        term *= -q / (kf * (kf + nu));
        sum += term;
        largest = largest.max(term.abs());
        if kf > half && term.abs() <= S::epsilon() * largest * S::lit(1e-3) {
            break;
        }
    }
    sum
}

fn bessel_j_miller<S: Real>(nu: S, x: S) -> S {
    let xf = x.as_f64();
    let mut start = (xf + 20.0 + 10.0 * xf.sqrt()).ceil() as usize;
    if start % 2 == 1 {
        start += 1;
    }

    // Neumann weights w_k = (nu+2k) Gamma(nu+k)/k!, with w_0 = Gamma(nu+1).
    let gamma_nu1 = gamma(nu + S::one());
    let half_count = start / 2;
    let mut weights = Vec::with_capacity(half_count + 1);
    weights.push(gamma_nu1);
    let mut ratio = gamma_nu1;
    for k in 1..=half_count {
        let kf = S::from_usize_lossy(k);
        if k > 1 {
            ratio *= (nu + kf - S::one()) / kf;
        }
        weights.push((nu + S::lit(2.0) * kf) * ratio);
    }

    let big = S::max_value().sqrt();
    let shrink = S::one() / big;
    let two_over_x = S::lit(2.0) / x;

    let mut upper = S::zero();
    let mut current = S::one();
    let mut norm = weights[half_count] * current;
    for n in (1..=start).rev() {
        let order = nu + S::from_usize_lossy(n);
        let lower = two_over_x * order * current - upper;
        upper = current;
        current = lower;
        if (n - 1) % 2 == 0 {
            norm += weights[(n - 1) / 2] * current;
        }
        if current.abs() > big {
            current *= shrink;
            upper *= shrink;
            norm *= shrink;
        }
    }
    current * (x * S::lit(0.5)).powf(nu) / norm
}

fn bessel_j_asymptotic<S: Real>(nu: S, x: S) -> S {
    let mu = S::lit(4.0) * nu * nu;
    let eight_x = S::lit(8.0) * x;
    let mut term = S::one();
    let mut p = S::one();
    let mut q = S::zero();
    for k in 1..MAX_TERMS {
        let kf = S::from_usize_lossy(k);
        let odd = S::lit(2.0) * kf - S::one();
        let next = term * (mu - odd * odd) / (kf * eight_x);
        if next.abs() >= term.abs() && k > 1 {
            break;
        }
        term = next;
        // term_k enters P (even k) or Q (odd k) with alternating signs.
        let sign = if (k / 2) % 2 == 0 {
            S::one()
        } else {
            -S::one()
        };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
        if term.abs() <= S::epsilon() * S::lit(1e-2) {
            break;
        }
    }
    let chi = x - (nu * S::lit(0.5) + S::lit(0.25)) * S::PI();
    (S::lit(2.0) / (S::PI() * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// `I_nu(z) / z^nu` near `z = 0` from the first six Taylor terms.
pub(crate) fn bessel_i_scaled_taylor<S: Real>(nu: S, z: S) -> S {
    scaled_taylor(nu, z, S::one())
}

/// `J_nu(z) / z^nu` near `z = 0` from the first six Taylor terms.
pub(crate) fn bessel_j_scaled_taylor<S: Real>(nu: S, z: S) -> S {
    scaled_taylor(nu, z, -S::one())
}

fn scaled_taylor<S: Real>(nu: S, z: S, sign: S) -> S {
    let q = z * z * S::lit(0.25);
    let mut term = S::one() / (S::lit(2.0).powf(nu) * gamma(nu + S::one()));
    let mut sum = term;
    for k in 1..6 {
        let kf = S::from_usize_lossy(k);
        term *= sign * q / (kf * (kf + nu));
        sum += term;
    }
    sum
}
