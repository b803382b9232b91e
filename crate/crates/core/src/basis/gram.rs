use crate::basis::grid::Index;
use crate::basis::Generator;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Default rectangle-rule resolution for Gram entries.
pub const DEFAULT_GRAM_RESOLUTION: usize = 401;

/// Table of `<phi^0_{1,s}, phi^n_{1,s}>` for `|n_j| <= K`.
#[derive(Debug, Clone, PartialEq)]
pub struct GramKernel<S> {
    half_width: i64,
    values: Vec<S>,
}

impl<S: Real> GramKernel<S> {
    fn zeros(half_width: i64) -> Self {
        let side = (2 * half_width + 1) as usize;
        GramKernel {
            half_width,
            values: vec![S::zero(); side * side],
        }
    }

    fn slot(&self, n: Index) -> Option<usize> {
        let k = self.half_width;
        if n[0].abs() > k || n[1].abs() > k {
            return None;
        }
        let side = (2 * k + 1) as usize;
        Some((n[1] + k) as usize * side + (n[0] + k) as usize)
    }

    fn set_symmetric(&mut self, n1: i64, n2: i64, v: S) {
        for (a, b) in [(n1, n2), (n2, n1)] {
            for sa in [-1, 1] {
                for sb in [-1, 1] {
                    let slot = self.slot([sa * a, sb * b]).unwrap();
                    self.values[slot] = v;
                }
            }
        }
    }

    pub fn half_width(&self) -> i64 {
        self.half_width
    }

    /// `G[n]`, zero outside the stored box.
    #[inline]
    pub fn get(&self, n: Index) -> S {
        self.slot(n).map_or(S::zero(), |i| self.values[i])
    }

    /// Kernel with every entry multiplied by `factor`.
    pub fn scaled(&self, factor: S) -> Self {
        GramKernel {
            half_width: self.half_width,
            values: self.values.iter().map(|v| *v * factor).collect(),
        }
    }

    /// Nonzero entries as `(n, G[n])`.
    pub fn entries(&self) -> Vec<(Index, S)> {
        let k = self.half_width;
        let mut out = Vec::new();
        for n2 in -k..=k {
            for n1 in -k..=k {
                let v = self.get([n1, n2]);
                if v != S::zero() {
                    out.push(([n1, n2], v));
                }
            }
        }
        out
    }
}

/// Gram entries of the unit-scale family with shift `s`.
///
/// Pixels use exact overlap areas. Other generators use the rectangle rule on
/// an `m x m` grid over the support box of `phi^0`.
pub fn gram_kernel<S: Real>(generator: &Generator<S>, s: S, m: usize) -> Result<GramKernel<S>> {
    if !(s > S::zero() && s.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "shift s must be positive, got {s}"
        )));
    }
    let h = generator.support_half_width();
    let k = (S::lit(2.0) * h / s).ceil().to_i64().unwrap_or(0);
    let mut kernel = GramKernel::zeros(k);

    if let Generator::Pixel = generator {
        let tri = |n: i64| (S::one() - s * S::from_i64_lossy(n)).max(S::zero());
        for n1 in 0..=k {
            for n2 in 0..=n1 {
                kernel.set_symmetric(n1, n2, tri(n1) * tri(n2));
            }
        }
        return Ok(kernel);
    }

    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "Gram quadrature needs at least 2 nodes per axis, got {m}"
        )));
    }
    let step = S::lit(2.0) * h / S::from_usize_lossy(m - 1);
    let weight = step * step;
    let mut nodes = Vec::new();
    for j in 0..m {
        let y = -h + step * S::from_usize_lossy(j);
        for i in 0..m {
            let x = -h + step * S::from_usize_lossy(i);
            let v = generator.eval([x, y]);
            if v != S::zero() {
                nodes.push((x, y, v));
            }
        }
    }
    for n1 in 0..=k {
        for n2 in 0..=n1 {
            let shift = [s * S::from_i64_lossy(n1), s * S::from_i64_lossy(n2)];
            if !generator.overlaps(shift) {
                continue;
            }
            let mut acc = S::zero();
            for &(x, y, v) in &nodes {
                acc += v * generator.eval([x - shift[0], y - shift[1]]);
            }
            kernel.set_symmetric(n1, n2, acc * weight);
        }
    }
    Ok(kernel)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pixel_unit_shift_is_identity() {
        let g = gram_kernel::<f64>(&Generator::Pixel, 1.0, 2).unwrap();
        assert_eq!(g.get([0, 0]), 1.0);
        for n in [[1, 0], [0, 1], [1, 1], [-1, 0], [3, 3]] {
            assert_eq!(g.get(n), 0.0);
        }
    }

    #[test]
    fn pixel_half_shift_overlaps() {
        let g = gram_kernel::<f64>(&Generator::Pixel, 0.5, 2).unwrap();
        assert_eq!(g.get([1, 0]), 0.5);
        assert_eq!(g.get([1, -1]), 0.25);
        assert_eq!(g.get([2, 0]), 0.0);
    }

    #[test]
    fn bilinear_entries_match_spline_values() {
        // Overlap of two hats at unit distance is 1/6; the self-overlap is 2/3.
        let g = gram_kernel::<f64>(&Generator::Bilinear, 1.0, 401).unwrap();
        assert!((g.get([0, 0]) - 4.0 / 9.0).abs() < 1e-4);
        assert!((g.get([1, 0]) - 1.0 / 9.0).abs() < 1e-4);
        assert!((g.get([1, 1]) - 1.0 / 36.0).abs() < 1e-4);
        assert_eq!(g.get([2, 0]), 0.0);
    }

    #[test]
    fn kb_symmetry_and_support() {
        let gen = Generator::<f64>::kaiser_bessel(1, 2.0, 2.0).unwrap();
        let g = gram_kernel(&gen, 1.0, 101).unwrap();
        assert_eq!(g.half_width(), 4);
        for (n, v) in g.entries() {
            assert_eq!(g.get([-n[0], -n[1]]), v);
            assert!(((n[0] * n[0] + n[1] * n[1]) as f64).sqrt() < 4.0);
        }
        assert!(g.get([0, 0]) > 0.0);
        assert_eq!(g.get([4, 0]), 0.0);
        assert_eq!(g.get([3, 3]), 0.0);
    }

    #[test]
    fn rejects_bad_arguments() {
        let gen = Generator::<f64>::Bilinear;
        assert!(gram_kernel(&gen, 1.0, 1).is_err());
        assert!(gram_kernel(&gen, -1.0, 11).is_err());
    }
}
