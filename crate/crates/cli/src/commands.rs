//! Subcommand implementations. Every command is deterministic given the
//! configuration, including its seed.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use galpat::baselines::{dd_reconstruct, fbp_reconstruct};
use galpat::basis::{
    partition_of_unity_defect, riesz_bounds, saturation_error, BasisGrid, Generator,
};
use galpat::galerkin::{galerkin_reconstruct, Solver};
use galpat::image::{Image, Raster};
use galpat::metrics::{phantom_image, relative_l2_error, ErrorReport};
use galpat::wave::{add_noise_with, forward_phantom, BasisForward, Sinogram};
use serde::Serialize;

use crate::config::{ExperimentConfig, Method};
use crate::error::{CliError, Result};
use crate::io::{
    fmt6, write_coefficients_csv, write_pgm, write_sinogram_bin, write_sinogram_csv, write_text,
};

/// Sample count per axis for the Riesz bound and partition-of-unity scans.
const ANALYSIS_NODES: usize = 33;

#[derive(Debug, Serialize)]
struct Provenance<'a> {
    command: &'a str,
    config_sha256: String,
    seed: u64,
    noise: f64,
    version: &'static str,
    outputs: Vec<String>,
}

fn ensure_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))
}

fn write_provenance(
    out: &Path,
    command: &str,
    config: &ExperimentConfig,
    outputs: &[&str],
) -> Result<()> {
    let record = Provenance {
        command,
        config_sha256: config.digest(),
        seed: config.seed,
        noise: config.noise,
        version: env!("CARGO_PKG_VERSION"),
        outputs: outputs.iter().map(|s| s.to_string()).collect(),
    };
    let path = out.join(format!("{command}.provenance.json"));
    write_text(
        &path,
        &serde_json::to_string_pretty(&record).expect("provenance serializes"),
    )
}

/// Noise-free data of the configured phantom.
pub fn clean_data(config: &ExperimentConfig) -> Result<Sinogram<f64>> {
    Ok(forward_phantom(
        &config.phantom,
        &config.geometry()?,
        &config.time_grid()?,
        &config.quadrature,
    )?)
}

/// Data with noise of level `level` drawn from the configured seed and model.
pub fn noisy_data(
    config: &ExperimentConfig,
    clean: &Sinogram<f64>,
    level: f64,
) -> Result<Sinogram<f64>> {
    Ok(add_noise_with(clean, level, config.seed, config.noise_model)?.0)
}

/// Writes `sinogram.csv`, `sinogram.bin` and a provenance record; returns the cache path.
pub fn cmd_simulate(config: &ExperimentConfig, out: &Path) -> Result<PathBuf> {
    config.validate()?;
    ensure_dir(out)?;
    let g = noisy_data(config, &clean_data(config)?, config.noise)?;
    write_sinogram_csv(&out.join("sinogram.csv"), &g)?;
    let bin = out.join("sinogram.bin");
    write_sinogram_bin(&bin, &g)?;
    write_provenance(out, "simulate", config, &["sinogram.csv", "sinogram.bin"])?;
    Ok(bin)
}

/// Image of one method, with coefficients when the method has any.
pub struct MethodOutput {
    pub image: Image<f64>,
    pub coefficients: Option<(BasisGrid<f64>, Vec<f64>)>,
    pub iterations: usize,
}

/// Forward operators built once and shared between runs on the same sampling.
pub struct Workspace {
    config: ExperimentConfig,
    generator: Generator<f64>,
    grid: BasisGrid<f64>,
    raster: Raster<f64>,
    truth: Image<f64>,
    forward: Option<BasisForward<f64>>,
    pixel: Option<(BasisGrid<f64>, BasisForward<f64>)>,
}

impl Workspace {
    pub fn new(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let grid = config.basis_grid()?;
        let raster = Raster::centers(&grid);
        Ok(Workspace {
            generator: config.generator()?,
            truth: phantom_image(&config.phantom, &raster),
            grid,
            raster,
            config: config.clone(),
            forward: None,
            pixel: None,
        })
    }

    pub fn raster(&self) -> &Raster<f64> {
        &self.raster
    }

    pub fn truth(&self) -> &Image<f64> {
        &self.truth
    }

    fn forward(&mut self) -> Result<&BasisForward<f64>> {
        if self.forward.is_none() {
            let c = &self.config;
            self.forward = Some(BasisForward::new(
                &self.generator,
                &self.grid,
                &c.geometry()?,
                &c.time_grid()?,
                &c.quadrature,
            )?);
        }
        Ok(self.forward.as_ref().unwrap())
    }

    fn pixel(&mut self) -> Result<&(BasisGrid<f64>, BasisForward<f64>)> {
        if self.pixel.is_none() {
            let c = &self.config;
            let grid = c.pixel_grid()?;
            let fwd = BasisForward::new(
                &Generator::Pixel,
                &grid,
                &c.geometry()?,
                &c.time_grid()?,
                &c.quadrature,
            )?;
            self.pixel = Some((grid, fwd));
        }
        Ok(self.pixel.as_ref().unwrap())
    }

    pub fn run(&mut self, method: Method, g: &Sinogram<f64>) -> Result<MethodOutput> {
        let raster = self.raster;
        let cg = self.config.cg;
        let solver = match method {
            Method::Galerkin => Some(Solver::Cholesky),
            Method::GalerkinCg | Method::Pixel => Some(Solver::Cg(cg)),
            _ => None,
        };
        match method {
            Method::Galerkin | Method::GalerkinCg => {
                let generator = self.generator.clone();
                let fwd = self.forward()?;
                let rec = galerkin_reconstruct(&generator, fwd, g, &solver.unwrap(), &raster)?;
                Ok(MethodOutput {
                    image: rec.image,
                    coefficients: Some((fwd.grid().clone(), rec.coefficients)),
                    iterations: rec.iterations,
                })
            }
            Method::Pixel => {
                let (grid, fwd) = self.pixel()?;
                let rec =
                    galerkin_reconstruct(&Generator::Pixel, fwd, g, &solver.unwrap(), &raster)?;
                Ok(MethodOutput {
                    image: rec.image,
                    coefficients: Some((grid.clone(), rec.coefficients)),
                    iterations: rec.iterations,
                })
            }
            Method::DdCg => {
                let generator = self.generator.clone();
                let fwd = self.forward()?;
                let rec = dd_reconstruct(&generator, fwd, g, &cg, &raster)?;
                Ok(MethodOutput {
                    image: rec.image,
                    coefficients: Some((fwd.grid().clone(), rec.coefficients)),
                    iterations: rec.iterations,
                })
            }
            Method::Fbp => Ok(MethodOutput {
                image: fbp_reconstruct(g, &raster)?,
                coefficients: None,
                iterations: 0,
            }),
        }
    }

    pub fn report(&self, method: Method, noise: f64, output: &MethodOutput) -> Result<ErrorReport> {
        Ok(ErrorReport {
            method: method.name().into(),
            noise,
            relative_l2: relative_l2_error(&output.image, &self.truth)?,
            raster: self.raster,
            iterations: output.iterations,
        })
    }
}

fn report_header() -> &'static str {
    "method,noise,relative_l2,iterations,raster_nodes\n"
}

fn report_row(r: &ErrorReport) -> String {
    format!(
        "{},{},{},{},{}\n",
        r.method,
        fmt6(r.noise),
        fmt6(r.relative_l2),
        r.iterations,
        r.raster.count()
    )
}

/// Reconstructs from a binary sinogram cache with `config.method`, writing the
/// image, coefficients and an error row.
pub fn cmd_reconstruct(
    config: &ExperimentConfig,
    sinogram: &Path,
    out: &Path,
) -> Result<ErrorReport> {
    let mut ws = Workspace::new(config)?;
    ensure_dir(out)?;
    let g = crate::io::read_sinogram_bin(sinogram, config.geometry()?, config.time_grid()?)?;
    if config.method == Method::Fbp {
        log::warn!("fbp does not use the generator specification");
    }
    let output = ws.run(config.method, &g)?;
    let report = ws.report(config.method, config.noise, &output)?;
    let mut outputs = vec!["image.pgm", "image.json", "errors.csv"];
    write_pgm(&out.join("image.pgm"), &output.image)?;
    if let Some((grid, c)) = &output.coefficients {
        write_coefficients_csv(&out.join("coefficients.csv"), grid, c)?;
        outputs.push("coefficients.csv");
    }
    write_text(
        &out.join("errors.csv"),
        &format!("{}{}", report_header(), report_row(&report)),
    )?;
    write_provenance(out, "reconstruct", config, &outputs)?;
    Ok(report)
}

/// One row of the shift sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub s: f64,
    pub t: f64,
    pub error: f64,
}

/// Galerkin errors over the shift values at fixed `N`, written to `sweep_s.csv`.
pub fn cmd_sweep_s(config: &ExperimentConfig, out: &Path) -> Result<Vec<SweepRow>> {
    config.validate()?;
    if !matches!(
        config.method,
        Method::Galerkin | Method::GalerkinCg | Method::DdCg
    ) {
        return Err(CliError::Config(format!(
            "sweep-s needs a basis method, got {}",
            config.method.name()
        )));
    }
    ensure_dir(out)?;
    let values = config.sweep_values()?;
    let mut rows = Vec::with_capacity(values.len());
    if !values.is_empty() {
        let g = noisy_data(config, &clean_data(config)?, config.noise)?;
        for s in values {
            let mut local = config.clone();
            local.grid = config.grid.with_s(s);
            let mut ws = Workspace::new(&local)?;
            let output = ws.run(config.method, &g)?;
            let error = relative_l2_error(&output.image, ws.truth())?;
            log::info!("s = {s}: error {error}");
            rows.push(SweepRow {
                s,
                t: local.grid.scale()?,
                error,
            });
        }
    }
    let mut text = String::from("s,T,error\n");
    for r in &rows {
        let _ = writeln!(text, "{},{},{}", fmt6(r.s), fmt6(r.t), fmt6(r.error));
    }
    write_text(&out.join("sweep_s.csv"), &text)?;
    write_provenance(out, "sweep-s", config, &["sweep_s.csv"])?;
    Ok(rows)
}

/// Errors of every configured method at every noise level, written to `compare.csv`.
pub fn cmd_compare(config: &ExperimentConfig, out: &Path) -> Result<Vec<ErrorReport>> {
    if config.methods.is_empty() {
        return Err(CliError::Config("compare needs at least one method".into()));
    }
    let mut ws = Workspace::new(config)?;
    ensure_dir(out)?;
    let clean = clean_data(config)?;
    let mut reports = Vec::new();
    for &level in &config.noise_levels {
        let g = noisy_data(config, &clean, level)?;
        for &method in &config.methods {
            let output = ws.run(method, &g)?;
            let report = ws.report(method, level, &output)?;
            log::info!(
                "noise {level}, {}: error {}",
                method.name(),
                report.relative_l2
            );
            reports.push(report);
        }
    }
    let mut text = String::from(report_header());
    for r in &reports {
        text.push_str(&report_row(r));
    }
    write_text(&out.join("compare.csv"), &text)?;
    write_provenance(out, "compare", config, &["compare.csv"])?;
    Ok(reports)
}

/// Approximation diagnostics of a generator at one shift.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisRow {
    pub s: f64,
    pub riesz_lower: f64,
    pub riesz_upper: f64,
    pub saturation: f64,
    pub partition_defect: f64,
}

/// Riesz bounds, saturation error and partition-of-unity defect, written to `basis.csv`.
pub fn cmd_analyze_basis(config: &ExperimentConfig, out: &Path) -> Result<Vec<BasisRow>> {
    config.validate()?;
    ensure_dir(out)?;
    let generator = config.generator()?;
    let mut rows = Vec::new();
    for &s in &config.analyze_s {
        if !(s > 0.0 && s.is_finite()) {
            return Err(CliError::Config(format!(
                "analyze_s values must be positive, got {s}"
            )));
        }
        let (lo, hi) = riesz_bounds(&generator, s, ANALYSIS_NODES)?;
        rows.push(BasisRow {
            s,
            riesz_lower: lo,
            riesz_upper: hi,
            saturation: saturation_error(&generator, s),
            partition_defect: partition_of_unity_defect(&generator, s, ANALYSIS_NODES)?,
        });
    }
    let mut text = String::from("s,riesz_lower,riesz_upper,saturation_error,partition_defect\n");
    for r in &rows {
        let _ = writeln!(
            text,
            "{},{},{},{},{}",
            fmt6(r.s),
            fmt6(r.riesz_lower),
            fmt6(r.riesz_upper),
            fmt6(r.saturation),
            fmt6(r.partition_defect)
        );
    }
    write_text(&out.join("basis.csv"), &text)?;
    write_provenance(out, "analyze-basis", config, &["basis.csv"])?;
    Ok(rows)
}
