use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::specfun::{bessel_i, bessel_i_scaled_taylor, bessel_j, bessel_j_scaled_taylor, sinc};
use crate::Point;

/// Half-width of the band around the Kaiser-Bessel branch point where the
/// transform switches to its Taylor expansion.
const BRANCH_EPS: f64 = 1e-6;

/// Above this taper the `w`-series gets long, so evaluation calls `bessel_i`.
const SERIES_MAX_GAMMA: f64 = 30.0;

/// Serializable description of a generating function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GeneratorSpec {
    Kb { m: u32, gamma: f64, a: f64 },
    Pixel,
    Bilinear,
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        GeneratorSpec::Kb {
            m: 1,
            gamma: 2.0,
            a: 2.0,
        }
    }
}

/// Radially symmetric Kaiser-Bessel window
/// `(1 - r^2/a^2)^{m/2} I_m(gamma sqrt(1 - r^2/a^2)) / I_m(gamma)` on `|x| <= a`.
#[derive(Debug, Clone, PartialEq)]
pub struct KaiserBessel<S> {
    m: u32,
    gamma: S,
    a: S,
    /// `phi = w^m * sum_k coeffs[k] w^k` with `w = 1 - r^2/a^2`.
    coeffs: Vec<S>,
    /// `1 / I_m(gamma)`, used when `coeffs` is empty.
    inv_norm: S,
    hat_scale: S,
}

impl<S: Real> KaiserBessel<S> {
    pub fn new(m: u32, gamma: S, a: S) -> Result<Self> {
        if !(a > S::zero() && a.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Kaiser-Bessel support a must be positive, got {a}"
            )));
        }
        if !(gamma >= S::zero() && gamma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Kaiser-Bessel taper gamma must be nonnegative, got {gamma}"
            )));
        }
        let mf = S::from_u32(m).unwrap();
        let mut m_factorial = S::one();
        for j in 2..=m {
            m_factorial *= S::from_u32(j).unwrap();
        }
        let two_pow_m = S::lit(2.0).powi(m as i32);

        if gamma.as_f64() <= SERIES_MAX_GAMMA {
            // d_k = (gamma/2)^{2k} m! / (k! (k+m)!), so I_m(gamma) = (gamma/2)^m / m! * sum d_k.
            let q = gamma * gamma * S::lit(0.25);
            let mut term = S::one();
            let mut raw = vec![term];
            let mut total = term;
            let mut k = 1usize;
            while k < 400 {
                let kf = S::from_usize_lossy(k);
                term *= q / (kf * (kf + mf));
                raw.push(term);
                total += term;
                if term <= S::epsilon() * S::lit(1e-3) * total && kf > gamma * S::lit(0.5) {
                    break;
                }
                k += 1;
            }
            let coeffs = raw.into_iter().map(|d| d / total).collect();
            let hat_scale = a * a * two_pow_m * m_factorial / total;
            return Ok(KaiserBessel {
                m,
                gamma,
                a,
                coeffs,
                inv_norm: S::zero(),
                hat_scale,
            });
        }
        let norm = bessel_i(mf, gamma)?;
        Ok(KaiserBessel {
            m,
            gamma,
            a,
            coeffs: Vec::new(),
            inv_norm: S::one() / norm,
            hat_scale: a * a * gamma.powi(m as i32) / norm,
        })
    }

    pub fn order(&self) -> u32 {
        self.m
    }

    pub fn taper(&self) -> S {
        self.gamma
    }

    pub fn support(&self) -> S {
        self.a
    }

    /// Value at squared radius `r2`.
    #[inline]
    pub fn profile_sq(&self, r2: S) -> S {
        let w = S::one() - r2 / (self.a * self.a);
        if w <= S::zero() {
            return S::zero();
        }
        if self.coeffs.is_empty() {
            let mf = S::from_u32(self.m).unwrap();
            let root = w.sqrt();
            let i = bessel_i(mf, self.gamma * root).unwrap_or_else(|_| S::nan());
            return root.powi(self.m as i32) * i * self.inv_norm;
        }
        let mut acc = S::zero();
        for &c in self.coeffs.iter().rev() {
            acc = acc * w + c;
        }
        acc * w.powi(self.m as i32)
    }

    #[inline]
    pub fn profile(&self, r: S) -> S {
        self.profile_sq(r * r)
    }

    /// Fourier transform as a function of `rho = |xi|`.
    pub fn hat_radial(&self, rho: S) -> S {
        let nu = S::from_u32(self.m + 1).unwrap();
        let q = self.gamma * self.gamma - self.a * self.a * rho * rho;
        let z = q.abs().sqrt();
        let scaled = if z < S::lit(BRANCH_EPS) {
            if q >= S::zero() {
                bessel_i_scaled_taylor(nu, z)
            } else {
                bessel_j_scaled_taylor(nu, z)
            }
        } else if q > S::zero() {
            bessel_i(nu, z)
                .map(|v| v / z.powf(nu))
                .unwrap_or_else(|_| S::nan())
        } else {
            bessel_j(nu, z)
                .map(|v| v / z.powf(nu))
                .unwrap_or_else(|_| S::nan())
        };
        self.hat_scale * scaled
    }
}

/// Generating function `phi` of the shift-invariant family.
#[derive(Debug, Clone, PartialEq)]
pub enum Generator<S> {
    /// Indicator of the half-open cube `[-1/2, 1/2)^2`.
    Pixel,
    KaiserBessel(KaiserBessel<S>),
    /// Tensor product of hat functions on `[-1, 1]^2`.
    Bilinear,
}

impl<S: Real> Generator<S> {
    pub fn kaiser_bessel(m: u32, gamma: S, a: S) -> Result<Self> {
        Ok(Generator::KaiserBessel(KaiserBessel::new(m, gamma, a)?))
    }

    pub fn from_spec(spec: &GeneratorSpec) -> Result<Self> {
        match *spec {
            GeneratorSpec::Kb { m, gamma, a } => Self::kaiser_bessel(m, S::lit(gamma), S::lit(a)),
            GeneratorSpec::Pixel => Ok(Generator::Pixel),
            GeneratorSpec::Bilinear => Ok(Generator::Bilinear),
        }
    }

    pub fn spec(&self) -> GeneratorSpec {
        match self {
            Generator::Pixel => GeneratorSpec::Pixel,
            Generator::Bilinear => GeneratorSpec::Bilinear,
            Generator::KaiserBessel(kb) => GeneratorSpec::Kb {
                m: kb.m,
                gamma: kb.gamma.as_f64(),
                a: kb.a.as_f64(),
            },
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Generator::Pixel => "pixel",
            Generator::KaiserBessel(_) => "kb",
            Generator::Bilinear => "bilinear",
        }
    }

    /// Half-width of the smallest axis-aligned box containing the support.
    pub fn support_half_width(&self) -> S {
        match self {
            Generator::Pixel => S::lit(0.5),
            Generator::KaiserBessel(kb) => kb.a,
            Generator::Bilinear => S::one(),
        }
    }

    /// Radius of the smallest centered disc containing the support.
    pub fn support_radius(&self) -> S {
        match self {
            Generator::KaiserBessel(kb) => kb.a,
            _ => self.support_half_width() * S::SQRT_2(),
        }
    }

    /// Whether translates by `shift` can overlap on a set of positive measure.
    pub fn overlaps(&self, shift: Point<S>) -> bool {
        match self {
            Generator::KaiserBessel(kb) => shift[0].hypot(shift[1]) < S::lit(2.0) * kb.a,
            _ => {
                let w = S::lit(2.0) * self.support_half_width();
                shift[0].abs() < w && shift[1].abs() < w
            }
        }
    }

    /// Decay exponent `p` with `|phi_hat(xi)| ~ |xi|^{-p}` along generic directions.
    pub fn decay_exponent(&self) -> S {
        match self {
            Generator::Pixel => S::lit(2.0),
            Generator::Bilinear => S::lit(4.0),
            Generator::KaiserBessel(kb) => S::from_u32(kb.m).unwrap() + S::lit(1.5),
        }
    }

    pub fn eval(&self, x: Point<S>) -> S {
        match self {
            Generator::Pixel => {
                let h = S::lit(0.5);
                let inside = |v: S| v >= -h && v < h;
                if inside(x[0]) && inside(x[1]) {
                    S::one()
                } else {
                    S::zero()
                }
            }
            Generator::KaiserBessel(kb) => kb.profile_sq(x[0] * x[0] + x[1] * x[1]),
            Generator::Bilinear => {
                let hat = |v: S| (S::one() - v.abs()).max(S::zero());
                hat(x[0]) * hat(x[1])
            }
        }
    }

    /// Fourier transform with the `(2 pi)^{-1}` convention in two dimensions.
    pub fn eval_hat(&self, xi: Point<S>) -> S {
        let half = S::lit(0.5);
        let inv_two_pi = S::FRAC_1_PI() * half;
        match self {
            Generator::Pixel => inv_two_pi * sinc(xi[0] * half) * sinc(xi[1] * half),
            Generator::KaiserBessel(kb) => kb.hat_radial(xi[0].hypot(xi[1])),
            Generator::Bilinear => {
                let a = sinc(xi[0] * half);
                let b = sinc(xi[1] * half);
                inv_two_pi * a * a * b * b
            }
        }
    }
}
