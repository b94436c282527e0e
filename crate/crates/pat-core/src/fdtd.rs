//! Explicit solver for the auxiliary equation
//! `w_tt = c1^2 (Lap w + (tau1^2 c0^2 / 4) Lap^2 w) + 2 xi`, `c1 = 2 c0`,
//! whose snapshot at `T` is `J_T xi`, together with phantoms and the image
//! `I = 2 (Id + tau1^2 c0^2 Lap)^2 phi + Lap I0`.

use std::io::Write;

use crate::error::{PatError, Result};
use crate::inverse::apply_jt;
use crate::kv::{parse_floats, KvSection};
use crate::medium::{Ball, MediumParams, Point};
use crate::spectral::{build_symbols, GridSpec, RealField};

/// `dx / (2 c1)`.
pub fn cfl_dt(grid: &GridSpec, c1: f64) -> f64 {
    grid.dx / (2.0 * c1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdtdConfig {
    pub grid: GridSpec,
    pub dt: f64,
    pub n_steps: usize,
    pub tau1: f64,
    pub c0: f64,
    pub c1: f64,
}

impl FdtdConfig {
    /// Step `dt_factor * cfl_dt`, shortened so that an integer number of
    /// steps ends exactly at `t`.
    pub fn for_horizon(grid: &GridSpec, m: &MediumParams, t: f64, dt_factor: f64) -> Result<Self> {
        if grid.dim != 2 {
            return Err(PatError::invalid("the finite-difference solver is two-dimensional"));
        }
        if !(t.is_finite() && t > 0.0) {
            return Err(PatError::invalid(format!("T must be positive, got {t}")));
        }
        if !(dt_factor.is_finite() && dt_factor > 0.0) {
            return Err(PatError::invalid("dt factor must be positive"));
        }
        let c1 = 2.0 * m.c0;
        let dt0 = cfl_dt(grid, c1) * dt_factor;
        let n_steps = ((t / dt0) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        Ok(FdtdConfig {
            grid: *grid,
            dt: t / n_steps as f64,
            n_steps,
            tau1: m.tau1,
            c0: m.c0,
            c1,
        })
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.n_steps as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Zero ghost nodes around the array.
    Dirichlet,
    Periodic,
}

/// 5-point Laplacian of a 2D row-major array with `n` nodes per axis.
pub fn laplacian_5pt(w: &[f64], n: usize, dx: f64, bc: Boundary, out: &mut [f64]) {
    let s = 1.0 / (dx * dx);
    let at = |i: isize, j: isize| -> f64 {
        let ni = n as isize;
        match bc {
            Boundary::Dirichlet => {
                if i < 0 || j < 0 || i >= ni || j >= ni {
                    0.0
                } else {
                    w[i as usize * n + j as usize]
                }
            }
            Boundary::Periodic => w[i.rem_euclid(ni) as usize * n + j.rem_euclid(ni) as usize],
        }
    };
    for i in 0..n {
        let interior_row = i > 0 && i + 1 < n;
        for j in 0..n {
            let c = w[i * n + j];
            let sum = if interior_row && j > 0 && j + 1 < n {
                w[(i - 1) * n + j] + w[(i + 1) * n + j] + w[i * n + j - 1] + w[i * n + j + 1]
            } else {
                let (ii, jj) = (i as isize, j as isize);
                at(ii - 1, jj) + at(ii + 1, jj) + at(ii, jj - 1) + at(ii, jj + 1)
            };
            out[i * n + j] = (sum - 4.0 * c) * s;
        }
    }
}

fn laplacian_field(f: &RealField, bc: Boundary) -> Result<RealField> {
    let g = f.grid();
    if g.dim != 2 {
        return Err(PatError::invalid("5-point Laplacian needs a 2D grid"));
    }
    let mut out = vec![0.0; g.len()];
    laplacian_5pt(f.values(), g.n, g.dx, bc, &mut out);
    RealField::new(*g, out)
}

/// Spectral Laplacian (multiplier `-k^2`), periodic on the grid.
pub fn laplacian_spectral(f: &RealField) -> Result<RealField> {
    let mult: Vec<f64> = f.grid().k_abs().iter().map(|k| -k * k).collect();
    f.fft().multiply(&mult)?.ifft_real()
}

/// Largest `|w|` after each step.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub history: Vec<(usize, f64)>,
    /// `1e10 max|xi| T^2`.
    pub threshold: f64,
    /// First step whose solution is non-finite or above `threshold`.
    pub blow_up_step: Option<usize>,
}

impl StabilityReport {
    pub fn blew_up(&self) -> bool {
        self.blow_up_step.is_some()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "step, max_abs")?;
        for (s, v) in &self.history {
            writeln!(w, "{s}, {v:e}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdtdOutcome {
    /// `w(., T)`; `None` after a blow-up.
    pub w: Option<RealField>,
    pub report: StabilityReport,
}

/// Leapfrog integration from `w = w_t = 0`. The first step uses the Taylor
/// start `w^1 = dt^2 xi`. A blow-up ends the run and is reported, not
/// returned as an error.
pub fn fdtd_run(xi: &RealField, cfg: &FdtdConfig) -> Result<FdtdOutcome> {
    if *xi.grid() != cfg.grid {
        return Err(PatError::GridMismatch("source and solver grid".into()));
    }
    let g = cfg.grid;
    let (n, len) = (g.n, g.len());
    let dt2 = cfg.dt * cfg.dt;
    let c1sq = cfg.c1 * cfg.c1;
    let b = cfg.tau1 * cfg.tau1 * cfg.c0 * cfg.c0 / 4.0;
    let t = cfg.horizon();
    let threshold = 1e10 * xi.max_abs() * t * t;
    let src: Vec<f64> = xi.values().iter().map(|v| 2.0 * dt2 * v).collect();

    let mut prev = vec![0.0; len];
    let mut cur: Vec<f64> = xi.values().iter().map(|v| dt2 * v).collect();
    let mut next = vec![0.0; len];
    let mut lap = vec![0.0; len];
    let mut bih = vec![0.0; len];
    let mut history = Vec::with_capacity(cfg.n_steps);
    let max_abs = |w: &[f64]| w.iter().fold(0.0f64, |m, v| if v.is_nan() { f64::NAN } else { m.max(v.abs()) });
    let diverged = |m: f64| !m.is_finite() || m > threshold;

    let m1 = max_abs(&cur);
    history.push((1, m1));
    let mut blow_up_step = diverged(m1).then_some(1);
    for step in 2..=cfg.n_steps {
        if blow_up_step.is_some() {
            break;
        }
        laplacian_5pt(&cur, n, g.dx, Boundary::Dirichlet, &mut lap);
        if b != 0.0 {
            laplacian_5pt(&lap, n, g.dx, Boundary::Dirichlet, &mut bih);
        }
        for i in 0..len {
            let op = lap[i] + if b != 0.0 { b * bih[i] } else { 0.0 };
            next[i] = 2.0 * cur[i] - prev[i] + dt2 * c1sq * op + src[i];
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
        let m = max_abs(&cur);
        history.push((step, m));
        if diverged(m) {
            blow_up_step = Some(step);
        }
    }
    let w = match blow_up_step {
        Some(_) => None,
        None => Some(RealField::new(g, cur)?),
    };
    Ok(FdtdOutcome {
        w,
        report: StabilityReport {
            history,
            threshold,
            blow_up_step,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhantomKind {
    SmoothBumps,
    PiecewiseConstant,
}

/// `amplitude * f(a - |x - b|^2 / u^2)` with `f(s) = e^{-1/s}` for `s > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub center: Point,
    pub a: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Disk { center: Point, radius: f64, value: f64 },
    Rect { min: Point, max: Point, value: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhantomSpec {
    pub kind: PhantomKind,
    pub bumps: Vec<Bump>,
    pub regions: Vec<Region>,
    /// Length unit `u` of the bump parameter `a`, m. `None` means the grid
    /// spacing.
    pub length_unit: Option<f64>,
}

fn dist(a: &Point, b: &Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn smooth_step(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

impl PhantomSpec {
    /// Reads `kind`, `length_unit` (`grid` or metres) and repeated
    /// `bump = x y a [amplitude]`, `disk = x y r value`,
    /// `rect = x0 y0 x1 y1 value` lines. Coordinates are in metres.
    pub fn from_section(sec: &KvSection) -> Result<Self> {
        let kind = match sec.get("kind").map(|e| e.value.as_str()) {
            Some("smooth_bumps") | None => PhantomKind::SmoothBumps,
            Some("piecewise_constant") => PhantomKind::PiecewiseConstant,
            Some(other) => return Err(PatError::Parse(format!("unknown phantom kind `{other}`"))),
        };
        let length_unit = match sec.get("length_unit").map(|e| e.value.as_str()) {
            None | Some("grid") => None,
            Some(v) => Some(
                v.parse::<f64>()
                    .map_err(|_| PatError::Parse(format!("bad length_unit `{v}`")))?,
            ),
        };
        let numbers = |key: &str, counts: &[usize]| -> Result<Vec<Vec<f64>>> {
            sec.get_all(key)
                .map(|e| {
                    let v = parse_floats(&e.value)?;
                    if counts.contains(&v.len()) {
                        Ok(v)
                    } else {
                        Err(PatError::Parse(format!("line {}: `{key}` expects {counts:?} numbers", e.line)))
                    }
                })
                .collect()
        };
        let bumps = numbers("bump", &[3, 4])?
            .into_iter()
            .map(|v| Bump {
                center: [v[0], v[1], 0.0],
                a: v[2],
                amplitude: v.get(3).copied().unwrap_or(1.0),
            })
            .collect();
        let mut regions: Vec<Region> = numbers("disk", &[4])?
            .into_iter()
            .map(|v| Region::Disk {
                center: [v[0], v[1], 0.0],
                radius: v[2],
                value: v[3],
            })
            .collect();
        regions.extend(numbers("rect", &[5])?.into_iter().map(|v| Region::Rect {
            min: [v[0].min(v[2]), v[1].min(v[3]), 0.0],
            max: [v[0].max(v[2]), v[1].max(v[3]), 0.0],
            value: v[4],
        }));
        let spec = PhantomSpec {
            kind,
            bumps,
            regions,
            length_unit,
        };
        if spec.bumps.iter().any(|b| !(b.a > 0.0)) {
            return Err(PatError::Parse("bump parameter a must be positive".into()));
        }
        Ok(spec)
    }

    pub fn render(&self, grid: &GridSpec, omega: &Ball) -> Result<RealField> {
        match self.kind {
            PhantomKind::SmoothBumps => phantom_smooth(self, grid, omega),
            PhantomKind::PiecewiseConstant => phantom_piecewise(self, grid, omega),
        }
    }
}

/// Sum of the smooth bumps. Every bump support must lie strictly inside
/// `omega`.
pub fn phantom_smooth(spec: &PhantomSpec, grid: &GridSpec, omega: &Ball) -> Result<RealField> {
    if spec.kind != PhantomKind::SmoothBumps {
        return Err(PatError::invalid("phantom is not of kind smooth_bumps"));
    }
    let u = spec.length_unit.unwrap_or(grid.dx);
    for b in &spec.bumps {
        if !(b.a > 0.0) {
            return Err(PatError::invalid(format!("bump a must be positive, got {}", b.a)));
        }
        let reach = dist(&b.center, &omega.center) + u * b.a.sqrt();
        if reach >= omega.radius {
            return Err(PatError::PhantomOutsideDomain(format!(
                "bump at {:?} reaches {reach:e} m from the centre, domain radius {:e} m",
                b.center, omega.radius
            )));
        }
    }
    RealField::from_fn(*grid, |x| {
        spec.bumps
            .iter()
            .map(|b| b.amplitude * smooth_step(b.a - (dist(x, &b.center) / u).powi(2)))
            .sum()
    })
}

/// Sum of disk and rectangle indicator functions.
pub fn phantom_piecewise(spec: &PhantomSpec, grid: &GridSpec, omega: &Ball) -> Result<RealField> {
    for r in &spec.regions {
        let corners: Vec<Point> = match *r {
            Region::Disk { center, radius, .. } => {
                if dist(&center, &omega.center) + radius >= omega.radius {
                    return Err(PatError::PhantomOutsideDomain(format!("disk at {center:?}")));
                }
                Vec::new()
            }
            Region::Rect { min, max, .. } => vec![
                [min[0], min[1], 0.0],
                [min[0], max[1], 0.0],
                [max[0], min[1], 0.0],
                [max[0], max[1], 0.0],
            ],
        };
        if corners.iter().any(|c| !(dist(c, &omega.center) < omega.radius)) {
            return Err(PatError::PhantomOutsideDomain("rectangle corner".into()));
        }
    }
    RealField::from_fn(*grid, |x| {
        spec.regions
            .iter()
            .map(|r| match *r {
                Region::Disk { center, radius, value } if dist(x, &center) <= radius => value,
                Region::Rect { min, max, value }
                    if (min[0]..=max[0]).contains(&x[0]) && (min[1]..=max[1]).contains(&x[1]) =>
                {
                    value
                }
                _ => 0.0,
            })
            .sum()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    /// `I0` from [`fdtd_run`], 5-point Laplacians with Dirichlet boundary.
    Fdtd,
    /// `I0` from the spectral `J_T`, spectral Laplacians.
    Spectral,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub i: RealField,
    pub i0: RealField,
    pub delta_i0: RealField,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageOutcome {
    /// `None` if the finite-difference run blew up.
    pub image: Option<Image>,
    pub stability: Option<StabilityReport>,
}

/// `I0 = 2 c0^2 J_T phi` and `I = 2 (Id + tau1^2 c0^2 Lap)^2 phi + Lap I0`,
/// the imaging functional without `R_D`.
pub fn image_i(phi: &RealField, m: &MediumParams, t: f64, via: Backend) -> Result<ImageOutcome> {
    image_i_dt(phi, m, t, via, 1.0)
}

/// [`image_i`] with the finite-difference step scaled by `dt_factor`.
pub fn image_i_dt(
    phi: &RealField,
    m: &MediumParams,
    t: f64,
    via: Backend,
    dt_factor: f64,
) -> Result<ImageOutcome> {
    let (i0, stability, bc) = match via {
        Backend::Fdtd => {
            let cfg = FdtdConfig::for_horizon(phi.grid(), m, t, dt_factor)?;
            let out = fdtd_run(phi, &cfg)?;
            match out.w {
                Some(w) => (w.scaled(2.0 * m.c0 * m.c0), Some(out.report), Some(Boundary::Dirichlet)),
                None => {
                    return Ok(ImageOutcome {
                        image: None,
                        stability: Some(out.report),
                    })
                }
            }
        }
        Backend::Spectral => {
            let s = build_symbols(phi.grid(), m);
            (apply_jt(phi, &s, t, None)?.scaled(2.0 * m.c0 * m.c0), None, None)
        }
    };
    let lap = |f: &RealField| match bc {
        Some(bc) => laplacian_field(f, bc),
        None => laplacian_spectral(f),
    };
    let b = m.tau1 * m.tau1 * m.c0 * m.c0;
    let once = phi.axpy(b, &lap(phi)?)?;
    let twice = once.axpy(b, &lap(&once)?)?;
    let delta_i0 = lap(&i0)?;
    let i = twice.scaled(2.0).axpy(1.0, &delta_i0)?;
    Ok(ImageOutcome {
        image: Some(Image { i, i0, delta_i0 }),
        stability,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kv::KvDocument;
    use crate::medium::Tau2Mode;

    #[test]
    fn cfl_values() {
        let g = GridSpec::new(2, 8, 2e-3, [0.0; 3]).unwrap();
        assert!((cfl_dt(&g, 3000.0) - 2e-3 / 6000.0).abs() < 1e-22);
        let h = GridSpec::new(2, 8, 1e-3, [0.0; 3]).unwrap();
        assert_eq!(cfl_dt(&h, 3000.0) * 2.0, cfl_dt(&g, 3000.0));
        let full_scale_dx: f64 = 4.0 * 0.5 / 1020.0;
        assert!((full_scale_dx - 1.9608e-3).abs() < 1e-7);
    }

    #[test]
    fn horizon_is_hit_exactly() {
        let g = GridSpec::new(2, 8, 1e-3, [0.0; 3]).unwrap();
        let m = MediumParams::water();
        let cfg = FdtdConfig::for_horizon(&g, &m, 1e-5, 1.0).unwrap();
        assert!((cfg.horizon() - 1e-5).abs() < 1e-18);
        assert!(cfg.dt <= cfl_dt(&g, 3000.0));
        assert_eq!(cfg.n_steps, 60);
    }

    #[test]
    fn bump_values() {
        let g = GridSpec::centered(2, 32, 1.0).unwrap();
        let omega = Ball {
            center: [0.0; 3],
            radius: 12.0,
        };
        let spec = PhantomSpec {
            kind: PhantomKind::SmoothBumps,
            bumps: vec![Bump {
                center: [0.0; 3],
                a: 4.0,
                amplitude: 1.0,
            }],
            regions: vec![],
            length_unit: None,
        };
        let phi = phantom_smooth(&spec, &g, &omega).unwrap();
        let c = g.flat_index(&[16, 16]);
        assert_eq!(phi.values()[c], (-0.25f64).exp());
        assert_eq!(phi.values()[g.flat_index(&[18, 16])], 0.0);
        let mut far = spec.clone();
        far.bumps[0].center = [10.5, 0.0, 0.0];
        assert!(matches!(
            phantom_smooth(&far, &g, &omega),
            Err(PatError::PhantomOutsideDomain(_))
        ));
    }

    #[test]
    fn phantom_from_text() {
        let doc = KvDocument::parse(
            "[phantom]\nkind = piecewise_constant\ndisk = 0 0 0.1 1\nrect = 0.2 0.2 -0.1 0.0 2\n",
        )
        .unwrap();
        let spec = PhantomSpec::from_section(doc.section("phantom").unwrap()).unwrap();
        assert_eq!(spec.kind, PhantomKind::PiecewiseConstant);
        assert_eq!(spec.regions.len(), 2);
        let g = GridSpec::centered(2, 16, 0.05).unwrap();
        let omega = Ball {
            center: [0.0; 3],
            radius: 0.35,
        };
        let phi = spec.render(&g, &omega).unwrap();
        assert_eq!(phi.values()[g.flat_index(&[8, 8])], 3.0);
    }

    #[test]
    fn zero_source_stays_zero() {
        let g = GridSpec::new(2, 16, 1e-3, [0.0; 3]).unwrap();
        let m = MediumParams::new(1500.0, 1e-7, Tau2Mode::Zero, 0.0).unwrap();
        let cfg = FdtdConfig::for_horizon(&g, &m, 1e-5, 1.0).unwrap();
        let out = fdtd_run(&RealField::zeros(g), &cfg).unwrap();
        assert_eq!(out.w.unwrap().max_abs(), 0.0);
        assert!(!out.report.blew_up());
    }
}
