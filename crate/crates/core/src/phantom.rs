//! Analytic phantoms built from scaled disc indicators.
//!
//! Discs have closed-form spherical means, so simulated data never passes
//! through the discretization used by the reconstruction methods.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::Point;

/// One disc indicator `amplitude * 1{|x - c| <= radius}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disc<S> {
    pub cx: S,
    pub cy: S,
    pub radius: S,
    pub amplitude: S,
}

impl<S: Real> Disc<S> {
    pub fn new(center: Point<S>, radius: S, amplitude: S) -> Self {
        Disc {
            cx: center[0],
            cy: center[1],
            radius,
            amplitude,
        }
    }

    pub fn center(&self) -> Point<S> {
        [self.cx, self.cy]
    }

    fn distance_to(&self, x: Point<S>) -> S {
        (x[0] - self.cx).hypot(x[1] - self.cy)
    }

    pub fn contains(&self, x: Point<S>) -> bool {
        self.distance_to(x) <= self.radius
    }

    /// Fraction of the circle `{z + r w}` lying inside the disc.
    pub fn arc_fraction(&self, z: Point<S>, r: S) -> S {
        let d = self.distance_to(z);
        let rho = self.radius;
        if r <= rho - d {
            return S::one();
        }
        if r >= d + rho || r <= d - rho {
            return S::zero();
        }
        let c = (d * d + r * r - rho * rho) / (S::lit(2.0) * d * r);
        c.max(-S::one()).min(S::one()).acos() / S::PI()
    }
}

/// Area of the intersection of two discs.
pub fn lens_area<S: Real>(c1: Point<S>, r1: S, c2: Point<S>, r2: S) -> S {
    let d = (c1[0] - c2[0]).hypot(c1[1] - c2[1]);
    if d >= r1 + r2 {
        return S::zero();
    }
    if d <= (r1 - r2).abs() {
        let r = r1.min(r2);
        return S::PI() * r * r;
    }
    let two = S::lit(2.0);
    let a1 = ((d * d + r1 * r1 - r2 * r2) / (two * d * r1))
        .max(-S::one())
        .min(S::one());
    let a2 = ((d * d + r2 * r2 - r1 * r1) / (two * d * r2))
        .max(-S::one())
        .min(S::one());
    let k = (-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2);
    r1 * r1 * a1.acos() + r2 * r2 * a2.acos() - S::lit(0.5) * k.max(S::zero()).sqrt()
}

/// Superposition of disc indicators; the initial pressure `f`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Phantom<S> {
    components: Vec<Disc<S>>,
}

impl<S: Real> Phantom<S> {
    pub fn new(components: Vec<Disc<S>>) -> Result<Self> {
        for (index, disc) in components.iter().enumerate() {
            let finite = disc.cx.is_finite()
                && disc.cy.is_finite()
                && disc.radius.is_finite()
                && disc.amplitude.is_finite();
            if !finite || disc.radius <= S::zero() {
                return Err(Error::InvalidParameter(format!(
                    "phantom component {index} needs finite values and a positive radius"
                )));
            }
        }
        Ok(Phantom { components })
    }

    pub fn empty() -> Self {
        Phantom {
            components: Vec::new(),
        }
    }

    pub fn components(&self) -> &[Disc<S>] {
        &self.components
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Checks that every disc lies in the open disc `B_R(0)`.
    pub fn check_inside(&self, radius: S) -> Result<()> {
        for (index, disc) in self.components.iter().enumerate() {
            if disc.cx.hypot(disc.cy) + disc.radius >= radius {
                return Err(Error::PhantomOutsideDisc {
                    index,
                    radius: radius.as_f64(),
                });
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: Point<S>) -> S {
        self.components
            .iter()
            .filter(|d| d.contains(x))
            .map(|d| d.amplitude)
            .sum()
    }

    /// Closed-form circular mean `(1/2pi) * int_{S^1} f(z + r w) ds(w)`.
    pub fn exact_spherical_mean(&self, z: Point<S>, r: S) -> S {
        self.components
            .iter()
            .map(|d| d.amplitude * d.arc_fraction(z, r))
            .sum()
    }

    /// `int f dx`.
    pub fn mass(&self) -> S {
        self.components
            .iter()
            .map(|d| d.amplitude * S::PI() * d.radius * d.radius)
            .sum()
    }

    /// Exact `L^2` inner product with another disc phantom.
    pub fn inner(&self, other: &Phantom<S>) -> S {
        let mut acc = S::zero();
        for a in &self.components {
            for b in &other.components {
                acc += a.amplitude
                    * b.amplitude
                    * lens_area(a.center(), a.radius, b.center(), b.radius);
            }
        }
        acc
    }

    pub fn norm_squared(&self) -> S {
        self.inner(self)
    }

    /// Sum of two phantoms as a single superposition.
    pub fn superpose(&self, other: &Phantom<S>) -> Phantom<S> {
        let mut components = self.components.clone();
        components.extend_from_slice(&other.components);
        Phantom { components }
    }
}

/// Reference phantom used by every experiment in the repository.
pub fn default_phantom<S: Real>() -> Phantom<S> {
    let disc = |cx: f64, cy: f64, radius: f64, amplitude: f64| {
        Disc::new([S::lit(cx), S::lit(cy)], S::lit(radius), S::lit(amplitude))
    };
    Phantom {
        components: vec![
            disc(-0.35, 0.2, 0.25, 1.0),
            disc(0.3, -0.25, 0.18, 0.8),
            disc(0.1, 0.35, 0.12, 1.2),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn unit_disc(cx: f64, cy: f64, r: f64) -> Disc<f64> {
        Disc::new([cx, cy], r, 1.0)
    }

    fn angular_mean(p: &Phantom<f64>, z: Point<f64>, r: f64, n: usize) -> f64 {
        (0..n)
            .map(|i| {
                let a = 2.0 * PI * (i as f64 + 0.5) / n as f64;
                p.eval([z[0] + r * a.cos(), z[1] + r * a.sin()])
            })
            .sum::<f64>()
            / n as f64
    }

    #[test]
    fn eval_indicator_and_superposition() {
        assert_eq!(Phantom::<f64>::empty().eval([0.1, 0.2]), 0.0);
        let p = Phantom::new(vec![unit_disc(0.0, 0.0, 0.5)]).unwrap();
        assert_eq!(p.eval([0.3, 0.0]), 1.0);
        assert_eq!(p.eval([0.6, 0.0]), 0.0);
        assert_eq!(p.eval([0.5, 0.0]), 1.0);
        let q = Phantom::new(vec![unit_disc(0.0, 0.0, 0.5), unit_disc(0.3, 0.0, 0.5)]).unwrap();
        assert_eq!(q.eval([0.15, 0.0]), 2.0);
    }

    #[test]
    fn spherical_mean_cases() {
        let p = Phantom::new(vec![unit_disc(0.0, 0.0, 0.5)]).unwrap();
        assert_eq!(p.exact_spherical_mean([0.0, 0.0], 0.3), 1.0);
        assert_eq!(p.exact_spherical_mean([1.0, 0.0], 0.4), 0.0);
        let q = Phantom::new(vec![unit_disc(0.2, 0.0, 0.3)]).unwrap();
        let exact = q.exact_spherical_mean([1.0, 0.0], 0.8);
        let brute = angular_mean(&q, [1.0, 0.0], 0.8, 100_000);
        assert!((exact - brute).abs() < 1e-5, "{exact} vs {brute}");
    }

    #[test]
    fn default_phantom_values() {
        let p = default_phantom::<f64>();
        assert_eq!(p.eval([-0.35, 0.2]), 1.0);
        assert_eq!(p.eval([0.9, 0.9]), 0.0);
        let mass = PI * (0.0625 * 1.0 + 0.0324 * 0.8 + 0.0144 * 1.2);
        assert!((p.mass() - mass).abs() < 1e-14);
        assert!((mass - 0.332_066_343_484_441).abs() < 1e-12);
        p.check_inside(1.0).unwrap();
    }

    #[test]
    fn rejects_escaping_components() {
        let p = Phantom::new(vec![unit_disc(0.8, 0.0, 0.3)]).unwrap();
        assert!(matches!(
            p.check_inside(1.0),
            Err(Error::PhantomOutsideDisc { index: 0, .. })
        ));
        assert!(Phantom::new(vec![unit_disc(0.0, 0.0, -0.1)]).is_err());
    }

    #[test]
    fn lens_area_limits() {
        let a = lens_area([0.0, 0.0], 0.5, [0.0, 0.0], 0.3);
        assert!((a - PI * 0.09).abs() < 1e-15);
        assert_eq!(lens_area([0.0, 0.0], 0.5, [2.0, 0.0], 0.3), 0.0);
        // Two unit discs at distance 1: 2pi/3 - sqrt(3)/2.
        let l = lens_area([0.0, 0.0], 1.0, [1.0, 0.0], 1.0);
        assert!((l - (2.0 * PI / 3.0 - 3f64.sqrt() / 2.0)).abs() < 1e-14);
    }

    #[test]
    fn norm_handles_overlap() {
        let p = Phantom::new(vec![unit_disc(0.0, 0.0, 0.3), unit_disc(0.2, 0.0, 0.3)]).unwrap();
        // Riemann sum on a fine grid.
        let n = 1200;
        let h = 1.2 / n as f64;
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = [-0.5 + (i as f64 + 0.5) * h, -0.6 + (j as f64 + 0.5) * h];
                let v = p.eval(x);
                acc += v * v * h * h;
            }
        }
        assert!((acc - p.norm_squared()).abs() / acc < 2e-3);
    }

    #[test]
    fn spherical_mean_quadrature_and_linearity() {
        use rand::{RngExt, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let p = default_phantom::<f64>();
        for _ in 0..50 {
            let ang: f64 = rng.random_range(0.0..2.0 * PI);
            let z = [ang.cos(), ang.sin()];
            let r: f64 = rng.random_range(0.05..2.0);
            let exact = p.exact_spherical_mean(z, r);
            let quad = angular_mean(&p, z, r, 10_000);
            assert!((exact - quad).abs() < 5e-4);
            let split: f64 = p
                .components()
                .iter()
                .map(|d| Phantom::new(vec![*d]).unwrap().exact_spherical_mean(z, r))
                .sum();
            assert_eq!(split, exact);
        }
    }
}
