use std::path::{Path, PathBuf};

use galpat::basis::{BasisGrid, Generator, GeneratorSpec};
use galpat::galerkin::CgOptions;
use galpat::phantom::{default_phantom, Phantom};
use galpat::wave::{DetectorGeometry, NoiseModel, TimeGrid, WaveQuadrature};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

/// Reconstruction method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Galerkin equation solved by band Cholesky.
    Galerkin,
    /// Galerkin equation solved by conjugate gradients.
    GalerkinCg,
    /// Discrete-data least squares by CGLS.
    DdCg,
    /// Filtered backprojection.
    Fbp,
    /// Galerkin with the pixel basis (`s = 1`, identity Gram matrix).
    Pixel,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Galerkin,
        Method::GalerkinCg,
        Method::DdCg,
        Method::Fbp,
        Method::Pixel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Galerkin => "galerkin",
            Method::GalerkinCg => "galerkin-cg",
            Method::DdCg => "dd-cg",
            Method::Fbp => "fbp",
            Method::Pixel => "pixel",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == name)
            .ok_or_else(|| CliError::Config(format!("unknown method {name:?}")))
    }
}

/// Basis lattice: `N` with `s T = 2/(N - 1)`, or an explicit `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n: Option<usize>,
    pub s: f64,
    pub t: Option<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            n: Some(100),
            s: 0.8081,
            t: None,
        }
    }
}

impl GridConfig {
    /// Scale `T`, checking the side condition when both `N` and `T` are given.
    pub fn scale(&self) -> Result<f64> {
        if !(self.s > 0.0 && self.s.is_finite()) {
            return Err(CliError::Config(format!(
                "grid.s must be positive, got {}",
                self.s
            )));
        }
        match (self.n, self.t) {
            (None, None) => Err(CliError::Config("grid needs n or t".into())),
            (Some(n), t) if n < 2 => Err(CliError::Config(format!(
                "grid.n must be at least 2, got {n} (t = {t:?})"
            ))),
            (Some(n), None) => Ok(2.0 / (self.s * (n - 1) as f64)),
            (None, Some(t)) => Ok(t),
            (Some(n), Some(t)) => {
                let want = 2.0 / (n - 1) as f64;
                let got = self.s * t;
                if ((got - want) / want).abs() > 1e-9 {
                    return Err(CliError::Config(format!(
                        "grid violates s T = 2/(N - 1): s T = {got}, 2/(N - 1) = {want}"
                    )));
                }
                Ok(t)
            }
        }
    }

    pub fn with_s(&self, s: f64) -> GridConfig {
        GridConfig {
            s,
            t: None,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub radius: f64,
    pub detectors: usize,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            radius: 1.0,
            detectors: 100,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeConfig {
    pub t_final: f64,
    pub samples: usize,
}

impl Default for TimeConfig {
    fn default() -> Self {
        TimeConfig {
            t_final: 3.0,
            samples: 376,
        }
    }
}

/// Everything an experiment depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub phantom: Phantom<f64>,
    pub generator: GeneratorSpec,
    pub grid: GridConfig,
    pub geometry: GeometryConfig,
    pub time: TimeConfig,
    pub method: Method,
    pub noise: f64,
    pub noise_model: NoiseModel,
    pub seed: u64,
    pub cg: CgOptions,
    pub quadrature: WaveQuadrature,
    /// Shift values for `sweep-s`; the default is the 14-value family
    /// `s_i = N (28 - i) / (20 (N - 1))`.
    pub sweep_s: Option<Vec<f64>>,
    pub noise_levels: Vec<f64>,
    pub methods: Vec<Method>,
    /// Shift values for `analyze-basis`.
    pub analyze_s: Vec<f64>,
    pub output: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            phantom: default_phantom(),
            generator: GeneratorSpec::default(),
            grid: GridConfig::default(),
            geometry: GeometryConfig::default(),
            time: TimeConfig::default(),
            method: Method::GalerkinCg,
            noise: 0.0,
            noise_model: NoiseModel::default(),
            seed: 0,
            cg: CgOptions::default(),
            quadrature: WaveQuadrature::default(),
            sweep_s: None,
            noise_levels: vec![0.0, 0.025, 0.05],
            methods: Method::ALL.to_vec(),
            analyze_s: vec![0.5, 0.75, 1.0, 1.25, 1.5],
            output: PathBuf::from("out"),
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let config: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the compact JSON form.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.scale()?;
        let check = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(CliError::Config(what.to_string()))
            }
        };
        check(
            self.geometry.radius > 0.0,
            "geometry.radius must be positive",
        )?;
        check(
            self.geometry.detectors > 0,
            "geometry.detectors must be positive",
        )?;
        check(self.time.t_final > 0.0, "time.t_final must be positive")?;
        check(self.time.samples >= 3, "time.samples must be at least 3")?;
        check(
            self.noise >= 0.0 && self.noise.is_finite(),
            "noise must be nonnegative",
        )?;
        check(self.cg.max_iter > 0, "cg.max_iter must be positive")?;
        check(
            self.noise_levels.iter().all(|p| *p >= 0.0 && p.is_finite()),
            "noise levels must be nonnegative",
        )?;
        if let Some(list) = &self.sweep_s {
            check(
                list.iter().all(|s| *s > 0.0 && s.is_finite()),
                "sweep_s values must be positive",
            )?;
            check(
                list.is_empty() || self.grid.n.is_some(),
                "sweep-s needs grid.n",
            )?;
        }
        self.phantom.check_inside(self.geometry.radius)?;
        Generator::<f64>::from_spec(&self.generator)?;
        Ok(())
    }

    pub fn geometry(&self) -> Result<DetectorGeometry<f64>> {
        Ok(DetectorGeometry::new(
            self.geometry.radius,
            self.geometry.detectors,
        )?)
    }

    pub fn time_grid(&self) -> Result<TimeGrid<f64>> {
        Ok(TimeGrid::new(self.time.t_final, self.time.samples)?)
    }

    pub fn generator(&self) -> Result<Generator<f64>> {
        Ok(Generator::from_spec(&self.generator)?)
    }

    pub fn basis_grid(&self) -> Result<BasisGrid<f64>> {
        Ok(BasisGrid::new(
            self.grid.scale()?,
            self.grid.s,
            self.geometry.radius,
        )?)
    }

    /// Pixel lattice with the same center spacing as the configured grid.
    pub fn pixel_grid(&self) -> Result<BasisGrid<f64>> {
        let spacing = self.grid.scale()? * self.grid.s;
        Ok(BasisGrid::new(spacing, 1.0, self.geometry.radius)?)
    }

    pub fn sweep_values(&self) -> Result<Vec<f64>> {
        if let Some(list) = &self.sweep_s {
            return Ok(list.clone());
        }
        let n = self
            .grid
            .n
            .ok_or_else(|| CliError::Config("sweep-s needs grid.n".into()))?;
        Ok((0..14)
            .map(|i| n as f64 * (28 - i) as f64 / (20.0 * (n - 1) as f64))
            .collect())
    }
}
