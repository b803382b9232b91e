use serde::{Deserialize, Serialize};

use crate::basis::{BasisGrid, Generator, Index, KaiserBessel};
use crate::error::{Error, Result};
use crate::phantom::Phantom;
use crate::quad::gauss_legendre;
use crate::scalar::Real;
use crate::wave::means::{box_arc_fraction, radial_circular_mean, AbelKernel};
use crate::wave::{DetectorGeometry, Sinogram, TimeGrid};
use crate::Point;

/// Discretization knobs of the forward computations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct WaveQuadrature {
    /// Radius nodes per time step when simulating phantom data.
    pub phantom_oversampling: usize,
    /// Number of tabulated detector-to-center distances on `[0, 2R]`.
    pub table_radii: usize,
    /// Gauss-Legendre nodes on the arc inside a Kaiser-Bessel support.
    pub arc_nodes: usize,
    /// Radius nodes per support radius of a basis function.
    pub profile_nodes_per_support: usize,
}

impl Default for WaveQuadrature {
    fn default() -> Self {
        WaveQuadrature {
            phantom_oversampling: 2,
            table_radii: 1200,
            arc_nodes: 64,
            profile_nodes_per_support: 32,
        }
    }
}

impl WaveQuadrature {
    fn validate(&self) -> Result<()> {
        if self.phantom_oversampling == 0
            || self.table_radii < 2
            || self.arc_nodes == 0
            || self.profile_nodes_per_support == 0
        {
            return Err(Error::InvalidParameter(format!(
                "quadrature counts must be positive (table radii >= 2): {self:?}"
            )));
        }
        Ok(())
    }
}

fn distance<S: Real>(a: Point<S>, b: Point<S>) -> S {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Simulated data `d/dt A_t M f` from exact circular means of a disc phantom.
pub fn forward_phantom<S: Real>(
    phantom: &Phantom<S>,
    geometry: &DetectorGeometry<S>,
    time: &TimeGrid<S>,
    quad: &WaveQuadrature,
) -> Result<Sinogram<S>> {
    quad.validate()?;
    phantom.check_inside(geometry.radius())?;
    let mut out = Sinogram::zeros(*geometry, *time);
    if phantom.is_empty() {
        return Ok(out);
    }
    let max_step = time.step() / S::from_usize_lossy(quad.phantom_oversampling);
    let kernel = AbelKernel::covering(max_step, time)?;
    for i in 0..geometry.count() {
        let z = geometry.detector(i);
        let (lo, hi) =
            phantom
                .components()
                .iter()
                .fold((S::infinity(), S::neg_infinity()), |(lo, hi), d| {
                    let dist = distance(z, d.center());
                    (lo.min(dist - d.radius), hi.max(dist + d.radius))
                });
        let band = kernel.band(lo, hi);
        if band.is_empty() {
            continue;
        }
        let profile: Vec<S> = band
            .clone()
            .map(|g| phantom.exact_spherical_mean(z, kernel.radius(g)))
            .collect();
        kernel.apply_band(band.start, &profile, out.row_mut(i));
    }
    Ok(out)
}

/// Samples `W phi^0_{T,s}((r_n, 0), t_j)` of a radial basis function at
/// distances `r_n = 2R n / (N_r - 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialWaveTable<S> {
    spacing: S,
    radii: usize,
    samples: usize,
    values: Vec<S>,
}

impl<S: Real> RadialWaveTable<S> {
    pub fn build(
        generator: &Generator<S>,
        grid: &BasisGrid<S>,
        geometry: &DetectorGeometry<S>,
        time: &TimeGrid<S>,
        quad: &WaveQuadrature,
    ) -> Result<Self> {
        quad.validate()?;
        let Generator::KaiserBessel(kb) = generator else {
            return Err(Error::UnsupportedGenerator(
                "radial wave tables need a radially symmetric generator",
            ));
        };
        let t = grid.t();
        let support = kb.support() * t;
        let kernel = AbelKernel::covering(
            support / S::from_usize_lossy(quad.profile_nodes_per_support),
            time,
        )?;
        let (nodes, weights) = gauss_legendre::<S>(quad.arc_nodes);
        let psi = scaled_profile(kb, t);
        let radii = quad.table_radii;
        let spacing = S::lit(2.0) * geometry.radius() / S::from_usize_lossy(radii - 1);
        let samples = time.count();
        let mut values = vec![S::zero(); radii * samples];
        for n in 0..radii {
            let rho = spacing * S::from_usize_lossy(n);
            let band = kernel.band(rho - support, rho + support);
            if band.is_empty() {
                continue;
            }
            let profile: Vec<S> = band
                .clone()
                .map(|g| {
                    radial_circular_mean(&psi, support, rho, kernel.radius(g), &nodes, &weights)
                })
                .collect();
            kernel.apply_band(
                band.start,
                &profile,
                &mut values[n * samples..(n + 1) * samples],
            );
        }
        Ok(RadialWaveTable {
            spacing,
            radii,
            samples,
            values,
        })
    }

    pub fn spacing(&self) -> S {
        self.spacing
    }

    pub fn radii(&self) -> usize {
        self.radii
    }

    pub fn radius(&self, n: usize) -> S {
        self.spacing * S::from_usize_lossy(n)
    }

    pub fn row(&self, n: usize) -> &[S] {
        &self.values[n * self.samples..(n + 1) * self.samples]
    }

    pub fn max_abs(&self) -> S {
        self.values.iter().fold(S::zero(), |m, v| m.max(v.abs()))
    }

    /// Left node and fractional offset of distance `r`; `None` beyond the table.
    #[inline]
    pub fn locate(&self, r: S) -> Option<(usize, S)> {
        let x = r / self.spacing;
        let last = S::from_usize_lossy(self.radii - 1);
        if !(x >= S::zero()) || x > last {
            return None;
        }
        let n = x.floor().to_usize()?.min(self.radii - 2);
        Some((n, x - S::from_usize_lossy(n)))
    }

    /// Linear interpolation in the distance at sample `j`.
    pub fn value(&self, r: S, j: usize) -> S {
        match self.locate(r) {
            Some((n, f)) => {
                let a = self.values[n * self.samples + j];
                let b = self.values[(n + 1) * self.samples + j];
                a + f * (b - a)
            }
            None => S::zero(),
        }
    }
}

/// `psi(q) = T^{-1} phi(sqrt(q) / T)` for a Kaiser-Bessel window.
fn scaled_profile<S: Real>(kb: &KaiserBessel<S>, t: S) -> impl Fn(S) -> S + '_ {
    let inv_t = S::one() / t;
    let inv_t2 = inv_t * inv_t;
    move |q: S| inv_t * kb.profile_sq(q * inv_t2)
}

/// Analytic forward path for pixel basis functions.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelForward<S> {
    grid: BasisGrid<S>,
    kernel: AbelKernel<S>,
}

impl<S: Real> PixelForward<S> {
    pub fn new(grid: &BasisGrid<S>, time: &TimeGrid<S>, quad: &WaveQuadrature) -> Result<Self> {
        quad.validate()?;
        let half = grid.t() * S::lit(0.5);
        let kernel = AbelKernel::covering(
            half * S::SQRT_2() / S::from_usize_lossy(quad.profile_nodes_per_support),
            time,
        )?;
        Ok(PixelForward {
            grid: grid.clone(),
            kernel,
        })
    }

    /// Circular means of `phi^k_{T,s}` about `z` on the radius band that meets its support.
    pub fn profile(&self, k: Index, z: Point<S>) -> (usize, Vec<S>) {
        let c = self.grid.center(k);
        let half = self.grid.t() * S::lit(0.5);
        let (x0, x1, y0, y1) = (c[0] - half, c[0] + half, c[1] - half, c[1] + half);
        let dx = (x0 - z[0]).max(z[0] - x1).max(S::zero());
        let dy = (y0 - z[1]).max(z[1] - y1).max(S::zero());
        let near = dx.hypot(dy);
        let fx = (z[0] - x0).abs().max((z[0] - x1).abs());
        let fy = (z[1] - y0).abs().max((z[1] - y1).abs());
        let far = fx.hypot(fy);
        let band = self.kernel.band(near, far);
        let amp = S::one() / self.grid.t();
        let values = band
            .clone()
            .map(|g| amp * box_arc_fraction(z, self.kernel.radius(g), x0, x1, y0, y1))
            .collect();
        (band.start, values)
    }

    /// `W phi^k_{T,s}(z, t_j)`.
    pub fn wave_at(&self, k: Index, z: Point<S>, j: usize) -> S {
        let (start, values) = self.profile(k, z);
        let row = &self.kernel.row(j)[start..start + values.len()];
        row.iter().zip(&values).map(|(a, b)| *a * *b).sum()
    }
}

/// Matrix-free forward operator `c -> (W sum_k c_k phi^k)(z_i, t_j)` of a basis.
#[derive(Debug, Clone, PartialEq)]
pub enum BasisForward<S> {
    Radial {
        table: RadialWaveTable<S>,
        grid: BasisGrid<S>,
        geometry: DetectorGeometry<S>,
        time: TimeGrid<S>,
    },
    Pixel {
        forward: PixelForward<S>,
        geometry: DetectorGeometry<S>,
        time: TimeGrid<S>,
    },
}

impl<S: Real> BasisForward<S> {
    pub fn new(
        generator: &Generator<S>,
        grid: &BasisGrid<S>,
        geometry: &DetectorGeometry<S>,
        time: &TimeGrid<S>,
        quad: &WaveQuadrature,
    ) -> Result<Self> {
        match generator {
            Generator::KaiserBessel(_) => Ok(BasisForward::Radial {
                table: RadialWaveTable::build(generator, grid, geometry, time, quad)?,
                grid: grid.clone(),
                geometry: *geometry,
                time: *time,
            }),
            Generator::Pixel => Ok(BasisForward::Pixel {
                forward: PixelForward::new(grid, time, quad)?,
                geometry: *geometry,
                time: *time,
            }),
            Generator::Bilinear => Err(Error::UnsupportedGenerator(
                "no forward path for bilinear elements",
            )),
        }
    }

    pub fn grid(&self) -> &BasisGrid<S> {
        match self {
            BasisForward::Radial { grid, .. } => grid,
            BasisForward::Pixel { forward, .. } => &forward.grid,
        }
    }

    pub fn geometry(&self) -> &DetectorGeometry<S> {
        match self {
            BasisForward::Radial { geometry, .. } | BasisForward::Pixel { geometry, .. } => {
                geometry
            }
        }
    }

    pub fn time(&self) -> &TimeGrid<S> {
        match self {
            BasisForward::Radial { time, .. } | BasisForward::Pixel { time, .. } => time,
        }
    }

    /// `W phi^k_{T,s}(z_i, t_j)`.
    pub fn wave_at(&self, k: Index, i: usize, j: usize) -> S {
        let z = self.geometry().detector(i);
        match self {
            BasisForward::Radial { table, grid, .. } => table.value(distance(z, grid.center(k)), j),
            BasisForward::Pixel { forward, .. } => forward.wave_at(k, z, j),
        }
    }

    fn check_len(&self, c: &[S]) -> Result<()> {
        let n = self.grid().len();
        if c.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "{} coefficients for an index set of size {n}",
                c.len()
            )));
        }
        Ok(())
    }

    /// Data of the expansion `sum_k c_k phi^k_{T,s}`.
    pub fn apply(&self, c: &[S]) -> Result<Sinogram<S>> {
        self.check_len(c)?;
        let geometry = *self.geometry();
        let mut out = Sinogram::zeros(geometry, *self.time());
        match self {
            BasisForward::Radial { table, grid, .. } => {
                let mut bins = vec![S::zero(); table.radii()];
                for i in 0..geometry.count() {
                    let z = geometry.detector(i);
                    bins.iter_mut().for_each(|b| *b = S::zero());
                    for (&k, &ck) in grid.indices().iter().zip(c) {
                        if ck == S::zero() {
                            continue;
                        }
                        if let Some((n, f)) = table.locate(distance(z, grid.center(k))) {
                            bins[n] += ck * (S::one() - f);
                            bins[n + 1] += ck * f;
                        }
                    }
                    let row = out.row_mut(i);
                    for (n, &b) in bins.iter().enumerate() {
                        if b == S::zero() {
                            continue;
                        }
                        for (o, v) in row.iter_mut().zip(table.row(n)) {
                            *o += b * *v;
                        }
                    }
                }
            }
            BasisForward::Pixel { forward, .. } => {
                let grid = &forward.grid;
                let nodes = forward.kernel.nodes();
                let mut acc = vec![S::zero(); nodes];
                for i in 0..geometry.count() {
                    let z = geometry.detector(i);
                    acc.iter_mut().for_each(|a| *a = S::zero());
                    let (mut lo, mut hi) = (nodes, 0);
                    for (&k, &ck) in grid.indices().iter().zip(c) {
                        if ck == S::zero() {
                            continue;
                        }
                        let (start, values) = forward.profile(k, z);
                        lo = lo.min(start);
                        hi = hi.max(start + values.len());
                        for (a, v) in acc[start..].iter_mut().zip(&values) {
                            *a += ck * *v;
                        }
                    }
                    if lo < hi {
                        forward.kernel.apply_band(lo, &acc[lo..hi], out.row_mut(i));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Adjoint of [`apply`](Self::apply) with respect to the plain sample sum.
    pub fn transpose_apply(&self, y: &Sinogram<S>) -> Result<Vec<S>> {
        if y.geometry() != self.geometry() || y.time() != self.time() {
            return Err(Error::ShapeMismatch(
                "sinogram sampling differs from the forward operator".into(),
            ));
        }
        let geometry = *self.geometry();
        let mut out = vec![S::zero(); self.grid().len()];
        match self {
            BasisForward::Radial { table, grid, .. } => {
                let mut proj = vec![S::zero(); table.radii()];
                for i in 0..geometry.count() {
                    let z = geometry.detector(i);
                    let yi = y.row(i);
                    if yi.iter().all(|v| *v == S::zero()) {
                        continue;
                    }
                    for (n, p) in proj.iter_mut().enumerate() {
                        *p = table.row(n).iter().zip(yi).map(|(a, b)| *a * *b).sum();
                    }
                    for (o, &k) in out.iter_mut().zip(grid.indices()) {
                        if let Some((n, f)) = table.locate(distance(z, grid.center(k))) {
                            *o += proj[n] * (S::one() - f) + proj[n + 1] * f;
                        }
                    }
                }
            }
            BasisForward::Pixel { forward, .. } => {
                let grid = &forward.grid;
                for i in 0..geometry.count() {
                    let z = geometry.detector(i);
                    let yi = y.row(i);
                    if yi.iter().all(|v| *v == S::zero()) {
                        continue;
                    }
                    let q = forward.kernel.transpose(yi);
                    for (o, &k) in out.iter_mut().zip(grid.indices()) {
                        let (start, values) = forward.profile(k, z);
                        *o += q[start..].iter().zip(&values).map(|(a, b)| *a * *b).sum();
                    }
                }
            }
        }
        Ok(out)
    }

    /// Galerkin right-hand side `d_k = <W phi^k, g>_t`.
    pub fn rhs(&self, g: &Sinogram<S>) -> Result<Vec<S>> {
        let weights = g.inner_weights();
        let mut weighted = g.clone();
        for (v, w) in weighted.values_mut().iter_mut().zip(&weights) {
            *v *= *w;
        }
        self.transpose_apply(&weighted)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phantom::{default_phantom, Disc};
    use crate::wave::t_inner;

    fn small_setup() -> (DetectorGeometry<f64>, TimeGrid<f64>) {
        (
            DetectorGeometry::new(1.0, 16).unwrap(),
            TimeGrid::new(3.0, 120).unwrap(),
        )
    }

    #[test]
    fn empty_phantom_gives_zero_data() {
        let (geo, time) = small_setup();
        let g =
            forward_phantom(&Phantom::empty(), &geo, &time, &WaveQuadrature::default()).unwrap();
        assert!(g.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn centered_disc_is_rotation_invariant() {
        let (geo, time) = small_setup();
        let p = Phantom::new(vec![Disc::new([0.0, 0.0], 0.4, 1.0)]).unwrap();
        let g = forward_phantom(&p, &geo, &time, &WaveQuadrature::default()).unwrap();
        for i in 1..geo.count() {
            for j in 0..time.count() {
                assert!((g.get(i, j) - g.get(0, j)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn forward_is_linear() {
        let (geo, time) = small_setup();
        let q = WaveQuadrature::default();
        let a = Phantom::new(vec![Disc::new([0.1, 0.2], 0.2, 1.0)]).unwrap();
        let b = Phantom::new(vec![Disc::new([-0.3, -0.1], 0.15, 0.5)]).unwrap();
        let ga = forward_phantom(&a, &geo, &time, &q).unwrap();
        let gb = forward_phantom(&b, &geo, &time, &q).unwrap();
        let gab = forward_phantom(&a.superpose(&b), &geo, &time, &q).unwrap();
        let sum = ga.add(&gb).unwrap();
        for (x, y) in gab.values().iter().zip(sum.values()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn escaping_phantom_rejected() {
        let (geo, time) = small_setup();
        let p = Phantom::new(vec![Disc::new([0.9, 0.0], 0.2, 1.0)]).unwrap();
        assert!(forward_phantom(&p, &geo, &time, &WaveQuadrature::default()).is_err());
    }

    #[test]
    fn isometry_on_default_phantom() {
        let geo = DetectorGeometry::new(1.0, 50).unwrap();
        let time = TimeGrid::new(3.0, 1500).unwrap();
        let p = default_phantom::<f64>();
        let g = forward_phantom(&p, &geo, &time, &WaveQuadrature::default()).unwrap();
        let lhs = p.norm_squared();
        let rhs = 2.0 * t_inner(&g, &g).unwrap();
        assert!((lhs - rhs).abs() / lhs < 0.02, "{lhs} vs {rhs}");
    }

    fn kb_setup() -> (
        Generator<f64>,
        BasisGrid<f64>,
        DetectorGeometry<f64>,
        TimeGrid<f64>,
    ) {
        let gen = Generator::kaiser_bessel(1, 2.0, 2.0).unwrap();
        let grid = BasisGrid::with_resolution(20, 1.0, 1.0).unwrap();
        let (geo, time) = small_setup();
        (gen, grid, geo, time)
    }

    #[test]
    fn radial_table_respects_propagation_speed() {
        let (gen, grid, geo, time) = kb_setup();
        let quad = WaveQuadrature {
            table_radii: 200,
            ..Default::default()
        };
        let table = RadialWaveTable::build(&gen, &grid, &geo, &time, &quad).unwrap();
        let max = table.max_abs();
        assert!(max > 0.0 && max.is_finite());
        let support = 2.0 * grid.t();
        for n in 0..table.radii() {
            let r = table.radius(n);
            for j in 0..time.count() {
                if time.time(j) + 2.0 * time.step() < r - support {
                    assert!(table.row(n)[j].abs() < 1e-3 * max);
                }
            }
        }
        assert!(RadialWaveTable::build(&Generator::Pixel, &grid, &geo, &time, &quad).is_err());
    }

    #[test]
    fn table_interpolation_at_nodes() {
        let (gen, grid, geo, time) = kb_setup();
        let quad = WaveQuadrature {
            table_radii: 100,
            ..Default::default()
        };
        let table = RadialWaveTable::build(&gen, &grid, &geo, &time, &quad).unwrap();
        for n in [0, 17, 98] {
            assert_eq!(table.value(table.radius(n), 30), table.row(n)[30]);
        }
        assert_eq!(table.value(2.5, 10), 0.0);
        let last = table.radii() - 1;
        assert_eq!(table.value(table.radius(last), 5), table.row(last)[5]);
    }

    #[test]
    fn table_matches_direct_basis_data() {
        // A basis function is itself a radial profile; compare with the numeric mean path.
        let (gen, grid, geo, time) = kb_setup();
        let quad = WaveQuadrature::default();
        let table = RadialWaveTable::build(&gen, &grid, &geo, &time, &quad).unwrap();
        let t = grid.t();
        let kernel = AbelKernel::covering(2.0 * t / 64.0, &time).unwrap();
        let rho = 0.83;
        let center = [rho, 0.0];
        let profile: Vec<f64> = (0..kernel.nodes())
            .map(|g| {
                crate::wave::spherical_mean_numeric(
                    |x| gen.eval([(x[0] - center[0]) / t, x[1] / t]) / t,
                    [0.0, 0.0],
                    kernel.radius(g),
                    4000,
                )
            })
            .collect();
        let direct = kernel.apply(&profile);
        let max = direct.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (j, d) in direct.iter().enumerate() {
            assert!((table.value(rho, j) - d).abs() < 2e-2 * max, "j={j}");
        }
    }

    #[test]
    fn transpose_is_adjoint_for_both_paths() {
        let (_, grid, geo, time) = kb_setup();
        let quad = WaveQuadrature {
            table_radii: 300,
            ..Default::default()
        };
        for gen in [
            Generator::kaiser_bessel(1, 2.0, 2.0).unwrap(),
            Generator::Pixel,
        ] {
            let op = BasisForward::new(&gen, &grid, &geo, &time, &quad).unwrap();
            let c: Vec<f64> = (0..grid.len()).map(|i| (i as f64 * 0.41).sin()).collect();
            let yv: Vec<f64> = (0..geo.count() * time.count())
                .map(|i| (i as f64 * 0.013).cos())
                .collect();
            let y = Sinogram::from_values(geo, time, yv).unwrap();
            let bc = op.apply(&c).unwrap();
            let bty = op.transpose_apply(&y).unwrap();
            let a: f64 = bc.values().iter().zip(y.values()).map(|(a, b)| a * b).sum();
            let b: f64 = c.iter().zip(&bty).map(|(a, b)| a * b).sum();
            assert!(
                (a - b).abs() < 1e-9 * a.abs().max(1.0),
                "{}: {a} vs {b}",
                gen.name()
            );
            // apply agrees with pointwise wave_at
            let k = grid.indices()[grid.len() / 3];
            let p = grid.position(k).unwrap();
            let mut e = vec![0.0; grid.len()];
            e[p] = 1.0;
            let be = op.apply(&e).unwrap();
            for (i, j) in [(0, 40), (5, 60), (11, 100)] {
                assert!((be.get(i, j) - op.wave_at(k, i, j)).abs() < 1e-12);
            }
            assert!(op.apply(&c[1..]).is_err());
        }
        assert!(BasisForward::new(&Generator::Bilinear, &grid, &geo, &time, &quad).is_err());
    }

    #[test]
    fn basis_isometry_approximately_holds() {
        // (2/R) |W phi^k|_t^2 should be close to |phi^k|^2.
        let grid = BasisGrid::with_resolution(20, 1.0, 1.0).unwrap();
        let geo = DetectorGeometry::new(1.0, 50).unwrap();
        let time = TimeGrid::new(3.0, 1500).unwrap();
        let quad = WaveQuadrature::default();
        let kb = Generator::kaiser_bessel(1, 2.0, 2.0).unwrap();
        let g0 = crate::basis::gram_kernel(&kb, 1.0, 201)
            .unwrap()
            .get([0, 0]);
        let pix_norm = 1.0;
        // Pixel edges converge slowly in the time step.
        for (gen, norm, tol) in [(kb, g0, 0.01), (Generator::Pixel, pix_norm, 0.05)] {
            let op = BasisForward::new(&gen, &grid, &geo, &time, &quad).unwrap();
            let p = grid.position([2, -1]).unwrap();
            let mut e = vec![0.0; grid.len()];
            e[p] = 1.0;
            let w = op.apply(&e).unwrap();
            let ratio: f64 = 2.0 * t_inner(&w, &w).unwrap() / norm;
            assert!((ratio - 1.0).abs() < tol, "{}: {ratio}", gen.name());
        }
    }
}
