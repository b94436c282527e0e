use std::f64::consts::PI;

use num_complex::Complex64;

use super::fft::{fft_nd, FftDirection};
use crate::error::{PatError, Result};
use crate::medium::Point;

/// Uniform cube grid with `n` nodes per axis, row-major with the last axis
/// fastest. Node `i` along an axis sits at `origin + i dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub dim: usize,
    pub n: usize,
    pub dx: f64,
    pub origin: Point,
}

impl GridSpec {
    pub fn new(dim: usize, n: usize, dx: f64, origin: Point) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(PatError::invalid(format!("dim must be 1, 2 or 3, got {dim}")));
        }
        if n < 2 {
            return Err(PatError::invalid(format!("need n >= 2, got {n}")));
        }
        if !(dx.is_finite() && dx > 0.0) {
            return Err(PatError::invalid(format!("dx must be positive, got {dx}")));
        }
        if origin.iter().any(|o| !o.is_finite()) || origin[dim..].iter().any(|&o| o != 0.0) {
            return Err(PatError::invalid("origin must be finite with unused axes zero"));
        }
        Ok(GridSpec { dim, n, dx, origin })
    }

    /// Grid whose node `n/2` along every axis sits at the coordinate origin.
    pub fn centered(dim: usize, n: usize, dx: f64) -> Result<Self> {
        let o = -((n / 2) as f64) * dx;
        let mut origin = [0.0; 3];
        origin[..dim.min(3)].iter_mut().for_each(|v| *v = o);
        GridSpec::new(dim, n, dx, origin)
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn extent(&self) -> f64 {
        self.n as f64 * self.dx
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx.powi(self.dim as i32)
    }

    /// Spacing of the wavenumber lattice, `2 pi / (n dx)`.
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.extent()
    }

    pub fn center(&self) -> Point {
        let mut c = [0.0; 3];
        for (a, v) in c.iter_mut().enumerate().take(self.dim) {
            *v = self.origin[a] + (self.n / 2) as f64 * self.dx;
        }
        c
    }

    pub fn multi_index(&self, mut i: usize) -> [usize; 3] {
        let mut idx = [0; 3];
        for a in (0..self.dim).rev() {
            idx[a] = i % self.n;
            i /= self.n;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().take(self.dim).fold(0, |acc, &j| acc * self.n + j)
    }

    pub fn coords(&self, i: usize) -> Point {
        let idx = self.multi_index(i);
        let mut p = [0.0; 3];
        for a in 0..self.dim {
            p[a] = self.origin[a] + idx[a] as f64 * self.dx;
        }
        p
    }

    /// Node closest to `p`.
    pub fn nearest_node(&self, p: &Point) -> usize {
        let mut idx = [0; 3];
        for a in 0..self.dim {
            let j = ((p[a] - self.origin[a]) / self.dx).round();
            idx[a] = j.clamp(0.0, (self.n - 1) as f64) as usize;
        }
        self.flat_index(&idx)
    }

    /// Signed DFT index in `[-n/2, n/2)`.
    fn signed(&self, j: usize) -> f64 {
        if j < self.n.div_ceil(2) {
            j as f64
        } else {
            j as f64 - self.n as f64
        }
    }

    pub fn wavevector(&self, i: usize) -> [f64; 3] {
        let idx = self.multi_index(i);
        let dk = self.dk();
        let mut k = [0.0; 3];
        for a in 0..self.dim {
            k[a] = dk * self.signed(idx[a]);
        }
        k
    }

    /// `|k|` at every node in DFT layout.
    pub fn k_abs(&self) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let k = self.wavevector(i);
                (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt()
            })
            .collect()
    }

    /// Nodes within the central half of every axis. The outer quarter on each
    /// side is padding that absorbs the periodic wrap-around of the spectral
    /// propagators.
    pub fn interior_mask(&self) -> Vec<bool> {
        let lo = self.n / 4;
        let hi = self.n - self.n / 4;
        (0..self.len())
            .map(|i| {
                let idx = self.multi_index(i);
                idx[..self.dim].iter().all(|&j| j >= lo && j < hi)
            })
            .collect()
    }
}

/// Real samples on a grid. Construction rejects NaN and infinities.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: GridSpec,
    values: Vec<f64>,
}

impl RealField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(PatError::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(PatError::NonFinite("real field"));
        }
        Ok(RealField { grid, values })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        RealField {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        RealField {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(&Point) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|i| f(&grid.coords(i))).collect();
        RealField::new(grid, values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `sum(values) dx^dim`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, s: f64) -> RealField {
        RealField {
            grid: self.grid,
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &RealField) -> Result<RealField> {
        self.check_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + s * b)
            .collect();
        RealField::new(self.grid, values)
    }

    pub fn check_grid(&self, other: &RealField) -> Result<()> {
        if self.grid != other.grid {
            return Err(PatError::GridMismatch("fields live on different grids".into()));
        }
        Ok(())
    }

    /// `||self - other|| / ||other||`, optionally restricted to a mask.
    pub fn rel_l2(&self, other: &RealField, mask: Option<&[bool]>) -> f64 {
        let (num, den) = self
            .values
            .iter()
            .zip(&other.values)
            .enumerate()
            .filter(|(i, _)| mask.is_none_or(|m| m[*i]))
            .fold((0.0, 0.0), |(n, d), (_, (a, b))| (n + (a - b).powi(2), d + b * b));
        (num / den).sqrt()
    }

    /// Number of nonzero samples outside the interior mask.
    pub fn support_in_padding(&self) -> usize {
        self.grid
            .interior_mask()
            .iter()
            .zip(&self.values)
            .filter(|(inside, v)| !**inside && **v != 0.0)
            .count()
    }

    /// Coordinates of all nonzero samples.
    pub fn support_points(&self) -> Vec<Point> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, _)| self.grid.coords(i))
            .collect()
    }

    /// Periodic translation by whole cells along each axis.
    pub fn roll(&self, shift: [isize; 3]) -> RealField {
        let g = self.grid;
        let n = g.n as isize;
        let mut values = vec![0.0; g.len()];
        for (i, v) in self.values.iter().enumerate() {
            let idx = g.multi_index(i);
            let mut dst = [0usize; 3];
            for a in 0..g.dim {
                dst[a] = (idx[a] as isize + shift[a]).rem_euclid(n) as usize;
            }
            values[g.flat_index(&dst)] = *v;
        }
        RealField { grid: g, values }
    }

    /// Embeds the field centrally into a larger grid of `n_new` nodes per axis.
    pub fn zero_pad(&self, n_new: usize) -> Result<RealField> {
        let g = self.grid;
        if n_new < g.n {
            return Err(PatError::invalid("zero_pad target is smaller than the grid"));
        }
        let off = (n_new - g.n) / 2;
        let mut origin = g.origin;
        origin[..g.dim].iter_mut().for_each(|o| *o -= off as f64 * g.dx);
        let big = GridSpec::new(g.dim, n_new, g.dx, origin)?;
        let mut values = vec![0.0; big.len()];
        for (i, v) in self.values.iter().enumerate() {
            let mut idx = g.multi_index(i);
            idx[..g.dim].iter_mut().for_each(|j| *j += off);
            values[big.flat_index(&idx)] = *v;
        }
        RealField::new(big, values)
    }

    /// Inverse of [`RealField::zero_pad`]: the central `n_new` nodes per axis.
    pub fn crop(&self, n_new: usize) -> Result<RealField> {
        let g = self.grid;
        if n_new > g.n || n_new < 2 {
            return Err(PatError::invalid("crop target must fit inside the grid"));
        }
        let off = (g.n - n_new) / 2;
        let mut origin = g.origin;
        origin[..g.dim].iter_mut().for_each(|o| *o += off as f64 * g.dx);
        let small = GridSpec::new(g.dim, n_new, g.dx, origin)?;
        let values = (0..small.len())
            .map(|i| {
                let mut idx = small.multi_index(i);
                idx[..g.dim].iter_mut().for_each(|j| *j += off);
                self.values[g.flat_index(&idx)]
            })
            .collect();
        RealField::new(small, values)
    }

    pub fn fft(&self) -> SpectralField {
        let mut values: Vec<Complex64> =
            self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_nd(&mut values, self.grid.dim, self.grid.n, FftDirection::Forward);
        SpectralField {
            grid: self.grid,
            values,
        }
    }
}

/// DFT coefficients of a field in standard (unshifted) layout.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    values: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(PatError::GridMismatch(format!(
                "{} coefficients for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(SpectralField { grid, values })
    }

    pub fn from_real(grid: GridSpec, values: &[f64]) -> Result<Self> {
        SpectralField::new(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// Pointwise product with a real multiplier in DFT layout.
    pub fn multiply(mut self, multiplier: &[f64]) -> Result<SpectralField> {
        if multiplier.len() != self.values.len() {
            return Err(PatError::GridMismatch("multiplier length".into()));
        }
        self.values
            .iter_mut()
            .zip(multiplier)
            .for_each(|(z, m)| *z *= *m);
        Ok(self)
    }

    /// Inverse DFT, keeping the real part.
    pub fn ifft_real(&self) -> Result<RealField> {
        let mut values = self.values.clone();
        fft_nd(&mut values, self.grid.dim, self.grid.n, FftDirection::Inverse);
        RealField::new(self.grid, values.into_iter().map(|z| z.re).collect())
    }
}
