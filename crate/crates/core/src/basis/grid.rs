use crate::basis::Generator;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::Point;

/// Integer shift index `k`.
pub type Index = [i64; 2];

const ABSENT: usize = usize::MAX;

/// Scale `T`, shift `s`, and the index set `{k : |T s k| < R}` in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisGrid<S> {
    t: S,
    s: S,
    r: S,
    extent: i64,
    indices: Vec<Index>,
    lookup: Vec<usize>,
}

impl<S: Real> BasisGrid<S> {
    pub fn new(t: S, s: S, r: S) -> Result<Self> {
        for (name, v) in [("T", t), ("s", s), ("R", r)] {
            if !(v > S::zero() && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "grid parameter {name} must be positive and finite, got {v}"
                )));
            }
        }
        let h = t * s;
        let extent = (r / h).floor().to_i64().unwrap_or(i64::MAX);
        if extent > 20_000 {
            return Err(Error::InvalidParameter(format!(
                "grid with spacing {h} in a disc of radius {r} is too large"
            )));
        }
        let side = (2 * extent + 1) as usize;
        let mut lookup = vec![ABSENT; side * side];
        let mut indices = Vec::new();
        for k2 in -extent..=extent {
            for k1 in -extent..=extent {
                let x = h * S::from_i64_lossy(k1);
                let y = h * S::from_i64_lossy(k2);
                if x.hypot(y) < r {
                    lookup[(k2 + extent) as usize * side + (k1 + extent) as usize] = indices.len();
                    indices.push([k1, k2]);
                }
            }
        }
        Ok(BasisGrid {
            t,
            s,
            r,
            extent,
            indices,
            lookup,
        })
    }

    /// Grid whose centers are spaced `2/(N - 1)`, i.e. `s T = 2/(N - 1)`.
    pub fn with_resolution(n: usize, s: S, r: S) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidParameter(format!(
                "resolution N must be at least 2, got {n}"
            )));
        }
        let t = S::lit(2.0) / (s * S::from_usize_lossy(n - 1));
        Self::new(t, s, r)
    }

    pub fn t(&self) -> S {
        self.t
    }

    pub fn s(&self) -> S {
        self.s
    }

    pub fn radius(&self) -> S {
        self.r
    }

    /// Distance `T s` between neighbouring centers.
    pub fn spacing(&self) -> S {
        self.t * self.s
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Largest `|k_j|` that can occur in the index set.
    pub fn extent(&self) -> i64 {
        self.extent
    }

    pub fn indices(&self) -> &[Index] {
        &self.indices
    }

    pub fn position(&self, k: Index) -> Option<usize> {
        let e = self.extent;
        if k[0].abs() > e || k[1].abs() > e {
            return None;
        }
        let side = (2 * e + 1) as usize;
        let p = self.lookup[(k[1] + e) as usize * side + (k[0] + e) as usize];
        (p != ABSENT).then_some(p)
    }

    /// Center `m_k = T s k`.
    pub fn center(&self, k: Index) -> Point<S> {
        let h = self.spacing();
        [h * S::from_i64_lossy(k[0]), h * S::from_i64_lossy(k[1])]
    }

    /// Largest position difference between indices whose offset has sup-norm at most `half_width`.
    pub fn bandwidth(&self, half_width: i64) -> usize {
        let mut band = 0;
        for (p, k) in self.indices.iter().enumerate() {
            for n2 in -half_width..=half_width {
                for n1 in -half_width..=half_width {
                    if let Some(q) = self.position([k[0] + n1, k[1] + n2]) {
                        band = band.max(p.abs_diff(q));
                    }
                }
            }
        }
        band
    }

    /// `phi^k_{T,s}(x) = T^{-1} phi(x/T - s k)`.
    pub fn eval_basis(&self, generator: &Generator<S>, k: Index, x: Point<S>) -> S {
        let c = self.center(k);
        let y = [(x[0] - c[0]) / self.t, (x[1] - c[1]) / self.t];
        generator.eval(y) / self.t
    }

    /// `sum_k c_k phi^k_{T,s}(x)` over the index set.
    pub fn expand(&self, generator: &Generator<S>, coeffs: &[S], x: Point<S>) -> Result<S> {
        if coeffs.len() != self.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficients for an index set of size {}",
                coeffs.len(),
                self.len()
            )));
        }
        let h = self.spacing();
        let reach = generator.support_half_width() * self.t;
        let lo = |v: S| {
            ((v - reach) / h)
                .floor()
                .to_i64()
                .unwrap_or(0)
                .max(-self.extent)
        };
        let hi = |v: S| {
            ((v + reach) / h)
                .ceil()
                .to_i64()
                .unwrap_or(0)
                .min(self.extent)
        };
        let mut acc = S::zero();
        for k2 in lo(x[1])..=hi(x[1]) {
            for k1 in lo(x[0])..=hi(x[0]) {
                if let Some(p) = self.position([k1, k2]) {
                    acc += coeffs[p] * self.eval_basis(generator, [k1, k2], x);
                }
            }
        }
        Ok(acc)
    }
}
