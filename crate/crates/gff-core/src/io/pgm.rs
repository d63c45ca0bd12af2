//! 8-bit binary PGM (`P5`, maxval 255) heatmaps with linear min-max scaling
//! recorded in a text sidecar.

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::analysis::GridField;
use crate::error::{GffError, Result};
use crate::io::fmt_g17;

/// The scaling applied to a written heatmap.
#[derive(Debug, Clone, Copy)]
pub struct PgmScale {
    pub min: f64,
    pub max: f64,
}

fn write_pgm_bytes(path: &Path, rows: usize, cols: usize, bytes: &[u8]) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    write!(f, "P5\n{cols} {rows}\n255\n")?;
    f.write_all(bytes)?;
    Ok(())
}

fn write_scale_sidecar(path: &Path, scale: PgmScale) -> Result<PathBuf> {
    let meta = path.with_extension("pgm.meta");
    std::fs::write(
        &meta,
        format!(
            "scaling = linear-min-max\nmin = {}\nmax = {}\n",
            fmt_g17(scale.min),
            fmt_g17(scale.max)
        ),
    )?;
    Ok(meta)
}

/// Grayscale heatmap of a field: byte = round(255 (v - min)/(max - min)).
/// Returns the scale written to the sidecar.
pub fn write_field_pgm(path: &Path, field: &GridField) -> Result<PgmScale> {
    let min = field.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = field
        .values
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    if !min.is_finite() || !max.is_finite() {
        return Err(GffError::InvalidInput(
            "field contains non-finite values".into(),
        ));
    }
    let span = if max > min { max - min } else { 1.0 };
    let bytes: Vec<u8> = field
        .values
        .iter()
        .map(|&v| ((v - min) / span * 255.0).round().clamp(0.0, 255.0) as u8)
        .collect();
    write_pgm_bytes(path, field.rows, field.cols, &bytes)?;
    let scale = PgmScale { min, max };
    write_scale_sidecar(path, scale)?;
    Ok(scale)
}

/// Indicator mask heatmap: members white (255) on black (0).
pub fn write_mask_pgm(
    path: &Path,
    rows: usize,
    cols: usize,
    points: &[(usize, usize)],
) -> Result<()> {
    let mut bytes = vec![0u8; rows * cols];
    for &(r, c) in points {
        if r >= rows || c >= cols {
            return Err(GffError::InvalidInput(format!(
                "point ({r}, {c}) outside the grid"
            )));
        }
        bytes[r * cols + c] = 255;
    }
    write_pgm_bytes(path, rows, cols, &bytes)?;
    write_scale_sidecar(path, PgmScale { min: 0.0, max: 1.0 })?;
    Ok(())
}
