use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use pat_core::medium::DetectorSeries;
use pat_core::spectral::{write_patgrid, RealField};
use pat_core::PatError;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Patgrid,
    Csv,
    Pgm,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Patgrid => "patgrid",
            Format::Csv => "csv",
            Format::Pgm => "pgm",
        }
    }
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "patgrid" => Ok(Format::Patgrid),
            "csv" => Ok(Format::Csv),
            "pgm" => Ok(Format::Pgm),
            other => Err(CliError::Config(format!("unknown output format `{other}`"))),
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

/// Writes `field` to `stem.<ext>` and returns the files written. `pgm` also
/// writes `stem.pgm.range` with the grey-level mapping.
pub fn export_grid(field: &RealField, format: Format, stem: &Path) -> Result<Vec<PathBuf>> {
    if field.values().iter().any(|v| !v.is_finite()) {
        return Err(PatError::NonFinite("exported field").into());
    }
    let path = stem.with_extension(format.extension());
    match format {
        Format::Patgrid => {
            write_patgrid(&path, field)?;
            Ok(vec![path])
        }
        Format::Csv => {
            let mut w = create(&path)?;
            write_node_csv(&mut w, field)
                .and_then(|_| w.flush())
                .map_err(|e| CliError::io(&path, e))?;
            Ok(vec![path])
        }
        Format::Pgm => {
            let side = PathBuf::from(format!("{}.range", path.display()));
            let (lo, hi) = write_pgm(field, &path)?;
            let mut w = create(&side)?;
            writeln!(w, "min = {lo:e}\nmax = {hi:e}")
                .and_then(|_| w.flush())
                .map_err(|e| CliError::io(&side, e))?;
            Ok(vec![path, side])
        }
    }
}

/// One row per node: coordinates then value.
fn write_node_csv<W: Write>(w: &mut W, field: &RealField) -> std::io::Result<()> {
    let g = field.grid();
    let axes = ["x", "y", "z"];
    writeln!(w, "{}, value", axes[..g.dim].join(", "))?;
    for (i, v) in field.values().iter().enumerate() {
        let p = g.coords(i);
        for c in &p[..g.dim] {
            write!(w, "{c:e}, ")?;
        }
        writeln!(w, "{v:e}")?;
    }
    Ok(())
}

/// 16-bit binary PGM; rows follow the first grid axis.
fn write_pgm(field: &RealField, path: &Path) -> Result<(f64, f64)> {
    let g = field.grid();
    if g.dim != 2 {
        return Err(CliError::Config(format!("pgm export needs a 2D field, got dim {}", g.dim)));
    }
    let v = field.values();
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let mut w = create(path)?;
    let mut body = Vec::with_capacity(2 * v.len());
    for &x in v {
        let level = if span > 0.0 {
            ((x - lo) / span * 65535.0).round() as u16
        } else {
            0
        };
        body.extend_from_slice(&level.to_be_bytes());
    }
    write!(w, "P5\n{} {}\n65535\n", g.n, g.n)
        .and_then(|_| w.write_all(&body))
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(path, e))?;
    Ok((lo, hi))
}

pub fn export_series(series: &DetectorSeries, path: &Path) -> Result<PathBuf> {
    let mut w = create(path)?;
    series
        .write_csv(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(path, e))?;
    Ok(path.to_path_buf())
}
