use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::grid::{GridSpec, RealField};
use crate::error::{PatError, Result};

const MAGIC: &str = "PATGRID";

/// Writes `PATGRID dim n dx origin...` followed by little-endian `f64` samples.
pub fn write_patgrid_to<W: Write>(mut w: W, field: &RealField) -> std::io::Result<()> {
    let g = field.grid();
    let origin: Vec<String> = g.origin[..g.dim].iter().map(|o| format!("{o:e}")).collect();
    writeln!(w, "{MAGIC} {} {} {:e} {}", g.dim, g.n, g.dx, origin.join(" "))?;
    for v in field.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()
}

pub fn read_patgrid_from<R: BufRead>(mut r: R) -> Result<RealField> {
    let mut header = String::new();
    r.read_line(&mut header)
        .map_err(|e| PatError::Parse(format!("patgrid header: {e}")))?;
    let mut tok = header.split_whitespace();
    if tok.next() != Some(MAGIC) {
        return Err(PatError::Parse("missing PATGRID magic".into()));
    }
    let nums: Vec<&str> = tok.collect();
    let bad = |what: &str| PatError::Parse(format!("patgrid header: bad {what}"));
    let dim: usize = nums.first().and_then(|s| s.parse().ok()).ok_or_else(|| bad("dim"))?;
    let n: usize = nums.get(1).and_then(|s| s.parse().ok()).ok_or_else(|| bad("n"))?;
    let dx: f64 = nums.get(2).and_then(|s| s.parse().ok()).ok_or_else(|| bad("dx"))?;
    if nums.len() != 3 + dim {
        return Err(bad("origin"));
    }
    let mut origin = [0.0; 3];
    for (o, s) in origin.iter_mut().zip(&nums[3..]) {
        *o = s.parse().map_err(|_| bad("origin"))?;
    }
    let grid = GridSpec::new(dim, n, dx, origin)?;
    let mut bytes = Vec::with_capacity(grid.len() * 8);
    r.read_to_end(&mut bytes)
        .map_err(|e| PatError::Parse(format!("patgrid body: {e}")))?;
    if bytes.len() != grid.len() * 8 {
        return Err(PatError::Parse(format!(
            "patgrid body has {} bytes, expected {}",
            bytes.len(),
            grid.len() * 8
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    RealField::new(grid, values)
}

pub fn write_patgrid(path: &Path, field: &RealField) -> Result<()> {
    let f = File::create(path).map_err(|e| PatError::io(path, e))?;
    write_patgrid_to(BufWriter::new(f), field).map_err(|e| PatError::io(path, e))
}

pub fn read_patgrid(path: &Path) -> Result<RealField> {
    let f = File::open(path).map_err(|e| PatError::io(path, e))?;
    read_patgrid_from(BufReader::new(f))
}

/// Writes the line through the grid center along `axis` as `x, value` rows.
pub fn write_csv_slice<W: Write>(mut w: W, field: &RealField, axis: usize) -> std::io::Result<()> {
    let g = field.grid();
    let mut idx = [g.n / 2; 3];
    writeln!(w, "x, value")?;
    for j in 0..g.n {
        idx[axis] = j;
        let i = g.flat_index(&idx);
        writeln!(w, "{:e}, {:e}", g.coords(i)[axis], field.values()[i])?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn patgrid_is_bit_exact() {
        let g = GridSpec::new(2, 4, 0.1, [-0.2, 0.3, 0.0]).unwrap();
        let f = RealField::new(g, (0..16).map(|i| (i as f64).sin() * 1e-300 + i as f64 / 3.0).collect())
            .unwrap();
        let mut buf = Vec::new();
        write_patgrid_to(&mut buf, &f).unwrap();
        assert!(buf.starts_with(b"PATGRID 2 4 1e-1 -2e-1 3e-1\n"));
        let back = read_patgrid_from(&buf[..]).unwrap();
        assert_eq!(back, f);
        assert!(read_patgrid_from(&buf[..buf.len() - 1]).is_err());
    }

    #[test]
    fn slice_has_n_rows() {
        let g = GridSpec::new(2, 5, 1.0, [0.0; 3]).unwrap();
        let mut buf = Vec::new();
        write_csv_slice(&mut buf, &RealField::zeros(g), 1).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 6);
    }
}
