use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::Point;

/// Equispaced point detectors on the circle of radius `R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorGeometry<S> {
    radius: S,
    count: usize,
}

impl<S: Real> DetectorGeometry<S> {
    pub fn new(radius: S, count: usize) -> Result<Self> {
        if !(radius > S::zero() && radius.is_finite()) || count == 0 {
            return Err(Error::InvalidParameter(format!(
                "detector circle needs R > 0 and at least one detector, got R={radius}, N_det={count}"
            )));
        }
        Ok(DetectorGeometry { radius, count })
    }

    pub fn radius(&self) -> S {
        self.radius
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Detector `z_i = R (cos(2 pi i / N), sin(2 pi i / N))`.
    pub fn detector(&self, i: usize) -> Point<S> {
        let angle =
            S::lit(2.0) * S::PI() * S::from_usize_lossy(i) / S::from_usize_lossy(self.count);
        [self.radius * angle.cos(), self.radius * angle.sin()]
    }

    /// Arc-length weight `2 pi R / N`, the same for every detector.
    pub fn weight(&self) -> S {
        S::lit(2.0) * S::PI() * self.radius / S::from_usize_lossy(self.count)
    }
}

/// Sampling times `t_j = j T / N_t`, `j = 1..N_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid<S> {
    t_final: S,
    count: usize,
}

impl<S: Real> TimeGrid<S> {
    pub fn new(t_final: S, count: usize) -> Result<Self> {
        if !(t_final > S::zero() && t_final.is_finite()) || count < 3 {
            return Err(Error::InvalidParameter(format!(
                "time grid needs T > 0 and at least 3 samples, got T={t_final}, N_t={count}"
            )));
        }
        Ok(TimeGrid { t_final, count })
    }

    pub fn t_final(&self) -> S {
        self.t_final
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn step(&self) -> S {
        self.t_final / S::from_usize_lossy(self.count)
    }

    /// Time of the zero-based sample `j`, i.e. `(j + 1) T / N_t`.
    pub fn time(&self, j: usize) -> S {
        self.step() * S::from_usize_lossy(j + 1)
    }

    pub fn times(&self) -> Vec<S> {
        (0..self.count).map(|j| self.time(j)).collect()
    }

    /// Factor `T / (N_t - 1)` of the data inner product quadrature.
    pub fn quadrature_factor(&self) -> S {
        self.t_final / S::from_usize_lossy(self.count - 1)
    }
}

/// Samples `g(z_i, t_j)`, stored row-major by detector.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram<S> {
    geometry: DetectorGeometry<S>,
    time: TimeGrid<S>,
    values: Vec<S>,
}

impl<S: Real> Sinogram<S> {
    pub fn zeros(geometry: DetectorGeometry<S>, time: TimeGrid<S>) -> Self {
        Sinogram {
            geometry,
            time,
            values: vec![S::zero(); geometry.count() * time.count()],
        }
    }

    pub fn from_values(
        geometry: DetectorGeometry<S>,
        time: TimeGrid<S>,
        values: Vec<S>,
    ) -> Result<Self> {
        let expected = geometry.count() * time.count();
        if values.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "sinogram needs {expected} values, got {}",
                values.len()
            )));
        }
        Ok(Sinogram {
            geometry,
            time,
            values,
        })
    }

    pub fn geometry(&self) -> &DetectorGeometry<S> {
        &self.geometry
    }

    pub fn time(&self) -> &TimeGrid<S> {
        &self.time
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [S] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    pub fn get(&self, i: usize, j: usize) -> S {
        self.values[i * self.time.count() + j]
    }

    /// Time trace of detector `i`.
    pub fn row(&self, i: usize) -> &[S] {
        let n = self.time.count();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [S] {
        let n = self.time.count();
        &mut self.values[i * n..(i + 1) * n]
    }

    pub fn same_layout(&self, other: &Sinogram<S>) -> bool {
        self.geometry == other.geometry && self.time == other.time
    }

    fn check_layout(&self, other: &Sinogram<S>) -> Result<()> {
        if self.same_layout(other) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(
                "sinograms have different detector or time sampling".into(),
            ))
        }
    }

    /// Euclidean norm of the sample vector.
    pub fn l2_norm(&self) -> S {
        self.values.iter().map(|v| *v * *v).sum::<S>().sqrt()
    }

    pub fn add(&self, other: &Sinogram<S>) -> Result<Sinogram<S>> {
        self.check_layout(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| *a + *b)
            .collect();
        Ok(Sinogram {
            values,
            ..self.clone()
        })
    }

    pub fn sub(&self, other: &Sinogram<S>) -> Result<Sinogram<S>> {
        self.check_layout(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| *a - *b)
            .collect();
        Ok(Sinogram {
            values,
            ..self.clone()
        })
    }

    pub fn scaled(&self, factor: S) -> Sinogram<S> {
        Sinogram {
            values: self.values.iter().map(|v| *v * factor).collect(),
            ..self.clone()
        }
    }

    /// Quadrature weights `w_i t_j T/(N_t - 1)` of the data inner product, row-major.
    pub fn inner_weights(&self) -> Vec<S> {
        inner_weights(&self.geometry, &self.time)
    }
}

pub(crate) fn inner_weights<S: Real>(geometry: &DetectorGeometry<S>, time: &TimeGrid<S>) -> Vec<S> {
    let c = geometry.weight() * time.quadrature_factor();
    let row: Vec<S> = time.times().into_iter().map(|t| c * t).collect();
    let mut out = Vec::with_capacity(geometry.count() * row.len());
    for _ in 0..geometry.count() {
        out.extend_from_slice(&row);
    }
    out
}

/// `<g1, g2>_t = T/(N_t - 1) sum_i sum_j w_i g1(i,j) g2(i,j) t_j`.
pub fn t_inner<S: Real>(g1: &Sinogram<S>, g2: &Sinogram<S>) -> Result<S> {
    g1.check_layout(g2)?;
    let n = g1.time.count();
    let times = g1.time.times();
    let mut acc = S::zero();
    for i in 0..g1.geometry.count() {
        let a = &g1.values[i * n..(i + 1) * n];
        let b = &g2.values[i * n..(i + 1) * n];
        let mut row = S::zero();
        for j in 0..n {
            row += a[j] * b[j] * times[j];
        }
        acc += row;
    }
    Ok(acc * g1.geometry.weight() * g1.time.quadrature_factor())
}

/// How a noise level `p` sets the magnitude of white Gaussian noise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseModel {
    /// `|e|_2 = p |g|_2` over all samples.
    #[default]
    RelativeNorm,
    /// Independent samples of variance `p |g|_{L^2}`, with the data norm taken
    /// over the detector circle and `[0, T]`.
    DataVariance,
}

/// Adds seeded Gaussian noise scaled so that `|e|_2 = level * |g|_2`.
/// Returns the noisy data and the noise itself.
pub fn add_noise<S: Real>(
    g: &Sinogram<S>,
    level: S,
    seed: u64,
) -> Result<(Sinogram<S>, Sinogram<S>)> {
    add_noise_with(g, level, seed, NoiseModel::RelativeNorm)
}

/// [`add_noise`] with a selectable noise model.
pub fn add_noise_with<S: Real>(
    g: &Sinogram<S>,
    level: S,
    seed: u64,
    model: NoiseModel,
) -> Result<(Sinogram<S>, Sinogram<S>)> {
    if !(level >= S::zero() && level.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise level must be nonnegative, got {level}"
        )));
    }
    let mut noise = Sinogram::zeros(g.geometry, g.time);
    if level == S::zero() {
        return Ok((g.clone(), noise));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for v in noise.values.iter_mut() {
        let x: f64 = StandardNormal.sample(&mut rng);
        *v = S::lit(x);
    }
    let scale = match model {
        NoiseModel::RelativeNorm => {
            let e_norm = noise.l2_norm();
            if e_norm > S::zero() {
                level * g.l2_norm() / e_norm
            } else {
                S::zero()
            }
        }
        NoiseModel::DataVariance => {
            let cell = g.geometry.weight() * g.time.step();
            (level * (g.l2_norm() * g.l2_norm() * cell).sqrt()).sqrt()
        }
    };
    for v in noise.values.iter_mut() {
        *v *= scale;
    }
    let noisy = g.add(&noise)?;
    Ok((noisy, noise))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn layout() -> (DetectorGeometry<f64>, TimeGrid<f64>) {
        (
            DetectorGeometry::new(1.0, 8).unwrap(),
            TimeGrid::new(3.0, 12).unwrap(),
        )
    }

    #[test]
    fn geometry_values() {
        let (geo, time) = layout();
        let z = geo.detector(2);
        assert!(z[0].abs() < 1e-15 && (z[1] - 1.0).abs() < 1e-15);
        assert!((geo.weight() * 8.0 - 2.0 * PI).abs() < 1e-14);
        assert_eq!(time.time(0), 0.25);
        assert_eq!(time.time(11), 3.0);
        assert!(DetectorGeometry::new(0.0, 4).is_err());
        assert!(TimeGrid::new(1.0, 2).is_err());
    }

    #[test]
    fn inner_product_of_ones() {
        let (geo, time) = layout();
        let ones = Sinogram::from_values(geo, time, vec![1.0; 96]).unwrap();
        let sum_t: f64 = time.times().iter().sum();
        let expect = 3.0 / 11.0 * 2.0 * PI * sum_t;
        assert!((t_inner(&ones, &ones).unwrap() - expect).abs() < 1e-12);
        let zero = Sinogram::zeros(geo, time);
        assert_eq!(t_inner(&ones, &zero).unwrap(), 0.0);
        let w: f64 = ones.inner_weights().iter().sum();
        assert!((w - expect).abs() < 1e-12);
    }

    #[test]
    fn inner_product_symmetric_and_checked() {
        let (geo, time) = layout();
        let a: Vec<f64> = (0..96).map(|i| (i as f64 * 0.3).sin()).collect();
        let b: Vec<f64> = (0..96).map(|i| (i as f64 * 0.7).cos()).collect();
        let a = Sinogram::from_values(geo, time, a).unwrap();
        let b = Sinogram::from_values(geo, time, b).unwrap();
        assert_eq!(t_inner(&a, &b).unwrap(), t_inner(&b, &a).unwrap());
        let other = Sinogram::zeros(geo, TimeGrid::new(3.0, 13).unwrap());
        assert!(t_inner(&a, &other).is_err());
        assert!(Sinogram::from_values(geo, time, vec![0.0; 5]).is_err());
    }

    #[test]
    fn noise_has_prescribed_norm() {
        let (geo, time) = layout();
        let g = Sinogram::from_values(geo, time, (0..96).map(|i| i as f64).collect()).unwrap();
        let (same, _) = add_noise(&g, 0.0, 1).unwrap();
        assert_eq!(same, g);
        let (noisy, e) = add_noise(&g, 0.05, 11).unwrap();
        assert!((e.l2_norm() / g.l2_norm() - 0.05).abs() < 1e-14);
        assert_eq!(noisy.sub(&g).unwrap().values().len(), 96);
        let (again, _) = add_noise(&g, 0.05, 11).unwrap();
        assert_eq!(again, noisy);
        let (other, _) = add_noise(&g, 0.05, 12).unwrap();
        assert_ne!(other, noisy);
    }

    #[test]
    fn variance_model_sets_sample_spread() {
        let geo = DetectorGeometry::new(1.0, 40).unwrap();
        let time = TimeGrid::new(3.0, 500).unwrap();
        let g = Sinogram::from_values(geo, time, vec![0.5; 20_000]).unwrap();
        let l2 = (0.25 * 2.0 * PI * 3.0f64).sqrt();
        let (_, e) = add_noise_with(&g, 0.05, 3, NoiseModel::DataVariance).unwrap();
        let var = e.values().iter().map(|v| v * v).sum::<f64>() / 20_000.0;
        assert!((var / (0.05 * l2) - 1.0).abs() < 0.05, "{var}");
        let (same, _) = add_noise_with(&g, 0.0, 3, NoiseModel::DataVariance).unwrap();
        assert_eq!(same, g);
    }
}
