//! Attenuation laws, Green functions and the causal time shift.
//!
//! Frequency-domain quantities follow the convention
//! `f^(w) = (2 pi)^{-1/2} int f(t) e^{i w t} dt`, so a time derivative turns
//! into a factor `-i w` and a factor `e^{i w s}` delays a signal by `s`.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{PatError, Result};

/// Spatial point. Two-dimensional data leave the last coordinate at zero.
pub type Point = [f64; 3];

pub fn norm(x: &Point) -> f64 {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

/// The two source relaxation settings for which the imaging identities hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tau2Mode {
    Zero,
    EqualTau1,
}

impl Tau2Mode {
    pub fn tau2(self, tau1: f64) -> f64 {
        match self {
            Tau2Mode::Zero => 0.0,
            Tau2Mode::EqualTau1 => tau1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MediumParams {
    /// Sound speed, m/s.
    pub c0: f64,
    /// Relaxation time, s.
    pub tau1: f64,
    /// Source relaxation time, s. Either zero or `tau1`.
    pub tau2: f64,
    /// Attenuation offset of the causal law, s/m.
    pub alpha2: f64,
}

impl MediumParams {
    pub fn new(c0: f64, tau1: f64, tau2_mode: Tau2Mode, alpha2: f64) -> Result<Self> {
        if !(c0.is_finite() && c0 > 0.0) {
            return Err(PatError::invalid(format!("c0 must be positive, got {c0}")));
        }
        if !(tau1.is_finite() && tau1 >= 0.0) {
            return Err(PatError::invalid(format!("tau1 must be >= 0, got {tau1}")));
        }
        if !(alpha2.is_finite() && alpha2 >= 0.0) {
            return Err(PatError::invalid(format!("alpha2 must be >= 0, got {alpha2}")));
        }
        Ok(MediumParams {
            c0,
            tau1,
            tau2: tau2_mode.tau2(tau1),
            alpha2,
        })
    }

    /// Water at room temperature: `c0 = 1500 m/s`, `tau1 = 1e-9 s`.
    pub fn water() -> Self {
        MediumParams {
            c0: 1500.0,
            tau1: 1e-9,
            tau2: 0.0,
            alpha2: 0.0,
        }
    }

    pub fn with_tau1(self, tau1: f64) -> Result<Self> {
        MediumParams::new(self.c0, tau1, self.tau2_mode(), self.alpha2)
    }

    pub fn with_tau2_mode(self, mode: Tau2Mode) -> Self {
        MediumParams {
            tau2: mode.tau2(self.tau1),
            ..self
        }
    }

    pub fn tau2_mode(&self) -> Tau2Mode {
        if self.tau2 == 0.0 {
            Tau2Mode::Zero
        } else {
            Tau2Mode::EqualTau1
        }
    }

    /// Critical wavenumber `2/(tau1 c0)`; `None` in the lossless limit.
    pub fn kc(&self) -> Option<f64> {
        (self.tau1 > 0.0).then(|| 2.0 / (self.tau1 * self.c0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Law {
    /// Causal law with finite wavefront speed.
    Ksb,
    /// Thermo-viscous law.
    Tv,
}

fn minus_i_omega(omega: f64) -> Complex64 {
    Complex64::new(0.0, -omega)
}

fn dispersive_part(omega: f64, m: &MediumParams) -> Complex64 {
    let root = (Complex64::new(1.0, 0.0) + Complex64::new(0.0, -m.tau1 * omega)).sqrt();
    minus_i_omega(omega) / (m.c0 * root)
}

pub fn alpha_ksb(omega: f64, m: &MediumParams) -> Complex64 {
    dispersive_part(omega, m) + m.alpha2 * minus_i_omega(omega)
}

pub fn alpha_tv(omega: f64, m: &MediumParams) -> Complex64 {
    dispersive_part(omega, m) - minus_i_omega(omega) / m.c0
}

pub fn alpha(law: Law, omega: f64, m: &MediumParams) -> Complex64 {
    match law {
        Law::Ksb => alpha_ksb(omega, m),
        Law::Tv => alpha_tv(omega, m),
    }
}

/// Complex wavenumber `k(w) = i alpha(w) + w/c0`.
pub fn wavenumber(law: Law, omega: f64, m: &MediumParams) -> Complex64 {
    Complex64::i() * alpha(law, omega, m) + omega / m.c0
}

pub fn wavefront_speed(m: &MediumParams) -> f64 {
    m.c0 / (1.0 + m.alpha2 * m.c0)
}

pub fn green_hat(x: &Point, omega: f64, m: &MediumParams, law: Law) -> Result<Complex64> {
    let r = norm(x);
    if r == 0.0 {
        return Err(PatError::Domain("Green function evaluated at |x| = 0".into()));
    }
    let k = wavenumber(law, omega, m);
    let phase = (Complex64::i() * k * r).exp();
    Ok(phase / ((2.0 * PI).sqrt() * 4.0 * PI * r))
}

/// Travel-time offset `|x| (1/c0 + alpha2)` between the two laws.
pub fn time_shift_t1(x: &Point, m: &MediumParams) -> f64 {
    norm(x) * (1.0 / m.c0 + m.alpha2)
}

/// Ball `B_R(center)`; the imaging domain and its detector surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn contains(&self, x: &Point) -> bool {
        norm(&sub(x, &self.center)) <= self.radius
    }

    pub fn distance_to_boundary(&self, x: &Point) -> f64 {
        (norm(&sub(x, &self.center)) - self.radius).abs()
    }

    /// `n` points on the boundary: evenly spaced on the circle for `dim = 2`,
    /// a Fibonacci lattice on the sphere for `dim = 3`.
    pub fn boundary_points(&self, dim: usize, n: usize) -> Vec<Point> {
        let c = self.center;
        let r = self.radius;
        match dim {
            1 => [-r, r].iter().take(n).map(|&d| [c[0] + d, 0.0, 0.0]).collect(),
            2 => (0..n)
                .map(|j| {
                    let a = 2.0 * PI * j as f64 / n as f64;
                    [c[0] + r * a.cos(), c[1] + r * a.sin(), 0.0]
                })
                .collect(),
            _ => {
                let golden = PI * (3.0 - 5f64.sqrt());
                (0..n)
                    .map(|j| {
                        let z = 1.0 - 2.0 * (j as f64 + 0.5) / n as f64;
                        let s = (1.0 - z * z).sqrt();
                        let a = golden * j as f64;
                        [c[0] + r * s * a.cos(), c[1] + r * s * a.sin(), c[2] + r * z]
                    })
                    .collect()
            }
        }
    }
}

/// Pressure traces recorded at detector positions, sampled from `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorSeries {
    positions: Vec<Point>,
    dt: f64,
    samples: Vec<Vec<f64>>,
}

impl DetectorSeries {
    pub fn new(positions: Vec<Point>, dt: f64, samples: Vec<Vec<f64>>) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(PatError::invalid(format!("dt must be positive, got {dt}")));
        }
        if positions.len() != samples.len() {
            return Err(PatError::invalid(format!(
                "{} positions but {} traces",
                positions.len(),
                samples.len()
            )));
        }
        if let Some(first) = samples.first() {
            if samples.iter().any(|s| s.len() != first.len()) {
                return Err(PatError::invalid("detectors have different sample counts"));
            }
        }
        if samples.iter().flatten().any(|v| !v.is_finite()) {
            return Err(PatError::NonFinite("detector series"));
        }
        Ok(DetectorSeries {
            positions,
            dt,
            samples,
        })
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn n_detectors(&self) -> usize {
        self.positions.len()
    }

    pub fn n_samples(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    /// Largest distance of a detector from the boundary of `omega`.
    pub fn boundary_deviation(&self, omega: &Ball) -> f64 {
        self.positions
            .iter()
            .map(|p| omega.distance_to_boundary(p))
            .fold(0.0, f64::max)
    }

    /// Relative L2 distance of all traces, `||self - other|| / ||other||`.
    pub fn rel_l2(&self, other: &DetectorSeries) -> f64 {
        let (num, den) = self
            .samples
            .iter()
            .flatten()
            .zip(other.samples.iter().flatten())
            .fold((0.0, 0.0), |(n, d), (a, b)| (n + (a - b).powi(2), d + b * b));
        (num / den).sqrt()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let header: Vec<String> = std::iter::once("t".to_string())
            .chain((0..self.n_detectors()).map(|j| format!("det_{j}")))
            .collect();
        writeln!(w, "{}", header.join(", "))?;
        for i in 0..self.n_samples() {
            write!(w, "{:e}", i as f64 * self.dt)?;
            for s in &self.samples {
                write!(w, ", {:e}", s[i])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Reads traces written by [`DetectorSeries::write_csv`]. Positions are
    /// not part of the format and must be supplied.
    pub fn read_csv<R: BufRead>(r: R, positions: Vec<Point>) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| PatError::Parse("empty detector csv".into()))?
            .map_err(|e| PatError::Parse(e.to_string()))?;
        let n_det = header.split(',').count().saturating_sub(1);
        let mut times = Vec::new();
        let mut samples = vec![Vec::new(); n_det];
        for line in lines {
            let line = line.map_err(|e| PatError::Parse(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let vals = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| PatError::Parse(format!("detector csv: {e}")))?;
            if vals.len() != n_det + 1 {
                return Err(PatError::Parse(format!(
                    "expected {} columns, found {}",
                    n_det + 1,
                    vals.len()
                )));
            }
            times.push(vals[0]);
            for (s, v) in samples.iter_mut().zip(&vals[1..]) {
                s.push(*v);
            }
        }
        let dt = match times.as_slice() {
            [t0, t1, ..] => t1 - t0,
            _ => return Err(PatError::Parse("need at least two samples".into())),
        };
        DetectorSeries::new(positions, dt, samples)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftDirection {
    /// `p_tv(x, t) = p_ksb(x, t + T1(x))`.
    CausalToTv,
    TvToCausal,
}

/// Shifts every trace by `T1` of its detector using a DFT phase rotation on a
/// zero-padded copy of twice the length.
pub fn apply_time_shift(
    series: &DetectorSeries,
    m: &MediumParams,
    direction: ShiftDirection,
) -> Result<DetectorSeries> {
    let n = series.n_samples();
    if n == 0 || series.n_detectors() == 0 {
        return Err(PatError::invalid("empty detector series"));
    }
    let window = (n - 1) as f64 * series.dt;
    let sign = match direction {
        ShiftDirection::CausalToTv => 1.0,
        ShiftDirection::TvToCausal => -1.0,
    };
    let len = 2 * n;
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(len);
    let inv = planner.plan_fft_inverse(len);
    let mut buf = vec![Complex64::new(0.0, 0.0); len];
    let mut out = Vec::with_capacity(series.n_detectors());
    for (pos, trace) in series.positions.iter().zip(&series.samples) {
        let shift = time_shift_t1(pos, m);
        if shift > window {
            return Err(PatError::ShiftExceedsWindow { shift, window });
        }
        buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for (z, &v) in buf.iter_mut().zip(trace) {
            z.re = v;
        }
        fwd.process(&mut buf);
        for (j, z) in buf.iter_mut().enumerate() {
            let js = if j < len / 2 {
                j as f64
            } else {
                j as f64 - len as f64
            };
            let w = 2.0 * PI * js / (len as f64 * series.dt);
            let rot = if j == len / 2 {
                // Nyquist bin: keep the spectrum Hermitian.
                Complex64::new((w * shift).cos(), 0.0)
            } else {
                Complex64::from_polar(1.0, sign * w * shift)
            };
            *z *= rot;
        }
        inv.process(&mut buf);
        out.push(buf[..n].iter().map(|z| z.re / len as f64).collect());
    }
    DetectorSeries::new(series.positions.clone(), series.dt, out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftReport {
    /// `max |T1(x - y) - T1(x)| / T1(x)` over all pairs.
    pub max_mismatch: f64,
    pub pass: bool,
}

pub fn check_shift_condition(
    boundary: &[Point],
    support: &[Point],
    m: &MediumParams,
    rel_tol: f64,
) -> Result<ShiftReport> {
    if boundary.is_empty() || support.is_empty() {
        return Err(PatError::invalid("point sets must be nonempty"));
    }
    let mut max_mismatch = 0.0f64;
    for x in boundary {
        let tx = time_shift_t1(x, m);
        if tx == 0.0 {
            return Err(PatError::Domain("boundary point with T1 = 0".into()));
        }
        for y in support {
            let txy = time_shift_t1(&sub(x, y), m);
            max_mismatch = max_mismatch.max((txy - tx).abs() / tx);
        }
    }
    Ok(ShiftReport {
        max_mismatch,
        pass: max_mismatch <= rel_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strong() -> MediumParams {
        MediumParams::new(1500.0, 1e-7, Tau2Mode::Zero, 1.0 / 1500.0).unwrap()
    }

    #[test]
    fn laws_vanish_at_zero_frequency() {
        let m = strong();
        assert_eq!(alpha_ksb(0.0, &m), Complex64::new(0.0, 0.0));
        assert_eq!(alpha_tv(0.0, &m), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn lossless_limit_is_pure_transport() {
        let m = MediumParams::new(1500.0, 0.0, Tau2Mode::Zero, 0.0).unwrap();
        let a = alpha_ksb(2.0e6, &m);
        assert!((a - Complex64::new(0.0, -2.0e6 / 1500.0)).norm() < 1e-12);
    }

    #[test]
    fn parity_at_one_megarad() {
        let m = MediumParams::water();
        let w = 1e6;
        for law in [Law::Ksb, Law::Tv] {
            let (p, q) = (alpha(law, w, &m), alpha(law, -w, &m));
            assert!((p.re - q.re).abs() <= 1e-15 * p.re.abs().max(1e-300));
            assert!((p.im + q.im).abs() <= 1e-15 * p.im.abs());
        }
        // Oracle: expand sqrt(1 - i e) = 1 - i e/2 + e^2/8 + O(e^3) with
        // e = tau1 w = 1e-3, so Re alpha_tv = w e / (2 c0) (1 + O(e)).
        let a = alpha_tv(w, &m);
        let approx = w * 1e-3 / (2.0 * 1500.0);
        assert!((a.re - approx).abs() / approx < 2e-3);
    }

    #[test]
    fn wavefront_speed_values() {
        let m = MediumParams::new(1500.0, 1e-9, Tau2Mode::Zero, 1.0 / 1500.0).unwrap();
        assert!((wavefront_speed(&m) - 750.0).abs() < 1e-12);
        assert_eq!(wavefront_speed(&MediumParams::water()), 1500.0);
    }

    #[test]
    fn green_static_limit() {
        let m = strong();
        let g = green_hat(&[0.3, 0.0, 0.4], 0.0, &m, Law::Tv).unwrap();
        let want = 1.0 / ((2.0 * PI).sqrt() * 4.0 * PI * 0.5);
        assert!((g.re - want).abs() < 1e-15 && g.im == 0.0);
        let g2 = green_hat(&[0.6, 0.0, 0.8], 0.0, &m, Law::Tv).unwrap();
        assert!((g.norm() / g2.norm() - 2.0).abs() < 1e-14);
        assert!(green_hat(&[0.0; 3], 1.0, &m, Law::Ksb).is_err());
    }

    #[test]
    fn t1_arithmetic() {
        let m = MediumParams::water();
        assert!((time_shift_t1(&[0.5, 0.0, 0.0], &m) - 1.0 / 3000.0).abs() < 1e-18);
        assert_eq!(time_shift_t1(&[0.0; 3], &m), 0.0);
    }

    #[test]
    fn integer_shift_moves_pulse() {
        let m = MediumParams::water();
        let dt = 1e-6;
        // T1 = 0.03 / 1500 = 20 samples.
        let pos = [0.03, 0.0, 0.0];
        let mut s = vec![0.0; 128];
        s[50] = 1.0;
        let series = DetectorSeries::new(vec![pos], dt, vec![s]).unwrap();
        let out = apply_time_shift(&series, &m, ShiftDirection::CausalToTv).unwrap();
        let (imax, vmax) = out.samples()[0]
            .iter()
            .enumerate()
            .fold((0, 0.0), |a, (i, &v)| if v > a.1 { (i, v) } else { a });
        assert_eq!(imax, 30);
        assert!((vmax - 1.0).abs() < 1e-9);
    }

    #[test]
    fn shift_longer_than_window_is_rejected() {
        let m = MediumParams::water();
        let series = DetectorSeries::new(vec![[1.0, 0.0, 0.0]], 1e-6, vec![vec![0.0; 16]]).unwrap();
        assert!(matches!(
            apply_time_shift(&series, &m, ShiftDirection::CausalToTv),
            Err(PatError::ShiftExceedsWindow { .. })
        ));
    }

    #[test]
    fn shift_condition_examples() {
        let m = MediumParams::water();
        let boundary = Ball {
            center: [0.0; 3],
            radius: 1.0,
        }
        .boundary_points(2, 64);
        let r = check_shift_condition(&boundary, &[[0.0; 3]], &m, 0.0).unwrap();
        assert!(r.pass && r.max_mismatch == 0.0);
        let support = Ball {
            center: [0.0; 3],
            radius: 1.0,
        }
        .boundary_points(2, 17);
        let r = check_shift_condition(&boundary, &support, &m, 0.1).unwrap();
        assert!(!r.pass);
        assert!(check_shift_condition(&[[0.0; 3]], &support, &m, 0.1).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let series = DetectorSeries::new(
            vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            0.5,
            vec![vec![1.0, 2.5, -3.0], vec![0.125, 0.0, 7.0]],
        )
        .unwrap();
        let mut buf = Vec::new();
        series.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t, det_0, det_1\n"));
        let back = DetectorSeries::read_csv(&buf[..], series.positions().to_vec()).unwrap();
        assert_eq!(back, series);
    }
}
