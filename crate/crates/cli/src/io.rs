//! File formats: sinogram CSV and binary cache, coefficient CSV, 16-bit PGM.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use galpat::basis::BasisGrid;
use galpat::image::Image;
use galpat::wave::{DetectorGeometry, Sinogram, TimeGrid};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Six significant digits in scientific notation.
pub fn fmt6(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x:.5e}")
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

fn finish(path: &Path, mut w: BufWriter<File>) -> Result<()> {
    w.flush().map_err(|e| CliError::io(path, e))
}

/// Writes `text` to `path`.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// CSV with columns `i,j,t,z_x,z_y,value`.
pub fn write_sinogram_csv(path: &Path, g: &Sinogram<f64>) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| CliError::io(path, e);
    writeln!(w, "i,j,t,z_x,z_y,value").map_err(io)?;
    for i in 0..g.geometry().count() {
        let z = g.geometry().detector(i);
        for (j, v) in g.row(i).iter().enumerate() {
            writeln!(
                w,
                "{i},{j},{},{},{},{}",
                fmt6(g.time().time(j)),
                fmt6(z[0]),
                fmt6(z[1]),
                fmt6(*v)
            )
            .map_err(io)?;
        }
    }
    finish(path, w)
}

/// Binary cache: `N_det` and `N_t` as little-endian `u64`, then the samples as
/// little-endian `f64` in detector-major order.
pub fn write_sinogram_bin(path: &Path, g: &Sinogram<f64>) -> Result<()> {
    let mut bytes = Vec::with_capacity(16 + 8 * g.values().len());
    bytes.extend_from_slice(&(g.geometry().count() as u64).to_le_bytes());
    bytes.extend_from_slice(&(g.time().count() as u64).to_le_bytes());
    for v in g.values() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Reads a binary cache, checking it against the expected sampling.
pub fn read_sinogram_bin(
    path: &Path,
    geometry: DetectorGeometry<f64>,
    time: TimeGrid<f64>,
) -> Result<Sinogram<f64>> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| CliError::io(path, e))?;
    if bytes.len() < 16 {
        return Err(CliError::Config(format!(
            "{}: truncated header",
            path.display()
        )));
    }
    let word = |k: usize| u64::from_le_bytes(bytes[8 * k..8 * k + 8].try_into().unwrap()) as usize;
    let (n_det, n_t) = (word(0), word(1));
    if n_det != geometry.count() || n_t != time.count() {
        return Err(CliError::Config(format!(
            "{}: sinogram is {n_det} x {n_t}, configuration expects {} x {}",
            path.display(),
            geometry.count(),
            time.count()
        )));
    }
    if bytes.len() != 16 + 8 * n_det * n_t {
        return Err(CliError::Config(format!(
            "{}: wrong payload size",
            path.display()
        )));
    }
    let values = bytes[16..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Sinogram::from_values(geometry, time, values)?)
}

/// CSV with columns `k1,k2,value`.
pub fn write_coefficients_csv(path: &Path, grid: &BasisGrid<f64>, c: &[f64]) -> Result<()> {
    let mut w = create(path)?;
    let io = |e| CliError::io(path, e);
    writeln!(w, "k1,k2,value").map_err(io)?;
    for (k, v) in grid.indices().iter().zip(c) {
        writeln!(w, "{},{},{}", k[0], k[1], fmt6(*v)).map_err(io)?;
    }
    finish(path, w)
}

/// Affine map from image values to 16-bit gray levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrayMap {
    /// Value mapped to gray level 0.
    pub min: f64,
    /// Value mapped to gray level 65535.
    pub max: f64,
    /// Raster origin, spacing and nodes per axis.
    pub origin: f64,
    pub step: f64,
    pub nodes: usize,
}

/// Binary 16-bit PGM with the top row at the largest `y`, plus a JSON sidecar
/// holding the value map.
pub fn write_pgm(path: &Path, image: &Image<f64>) -> Result<GrayMap> {
    let (lo, hi) = image.range();
    let raster = image.raster();
    let map = GrayMap {
        min: lo,
        max: hi,
        origin: raster.origin(),
        step: raster.step(),
        nodes: raster.count(),
    };
    let n = raster.count();
    let mut bytes = format!("P5\n{n} {n}\n65535\n").into_bytes();
    let span = if hi > lo { hi - lo } else { 1.0 };
    for iy in (0..n).rev() {
        for ix in 0..n {
            let level = ((image.get(ix, iy) - lo) / span * 65535.0)
                .round()
                .clamp(0.0, 65535.0) as u16;
            bytes.extend_from_slice(&level.to_be_bytes());
        }
    }
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))?;
    let sidecar = path.with_extension("json");
    write_text(
        &sidecar,
        &serde_json::to_string_pretty(&map).expect("map serializes"),
    )?;
    Ok(map)
}
