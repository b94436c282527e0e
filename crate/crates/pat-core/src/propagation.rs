//! k-space propagators, PAT data generation and regularized time reversal.
//!
//! Two normalizations coexist. The `*_hat` functions return the multipliers
//! of the continuous transform and carry the factor `(2 pi)^{-dim/2}`. The
//! pipeline functions work on DFT coefficients, where that factor cancels
//! against the convolution theorem; they use the same expressions without it.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{PatError, Result};
use crate::medium::{Ball, DetectorSeries, MediumParams, Point, Tau2Mode};
use crate::spectral::{build_symbols, required_d, RealField, Scaled, SpectralField, SymbolTable};

/// Magnitude above which a reversed spectrum is reported as overflowing.
pub const OVERFLOW_BOUND: f64 = 1e300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReversalConfig {
    /// Reversal horizon, s.
    pub t: f64,
    /// Margin in `D = 2 (c0/kc + eps) T`, m^2/s.
    pub eps: f64,
    /// Regularization area, m^2.
    pub d: f64,
    pub tau2_mode: Tau2Mode,
}

impl ReversalConfig {
    /// Checked constructor: requires `d >= required_d(m, t, eps)`.
    pub fn new(m: &MediumParams, t: f64, eps: f64, d: f64, tau2_mode: Tau2Mode) -> Result<Self> {
        let required = required_d(m, t, eps)?;
        if !(d >= required) {
            return Err(PatError::BelowRequiredD { d, required });
        }
        Ok(ReversalConfig { t, eps, d, tau2_mode })
    }

    /// `D` set to its threshold. `eps` defaults to `0.1 c0/kc`, which is
    /// zero in the lossless case and must then be given.
    pub fn at_threshold(
        m: &MediumParams,
        t: f64,
        eps: Option<f64>,
        tau2_mode: Tau2Mode,
    ) -> Result<Self> {
        let eps = eps.unwrap_or(0.05 * m.tau1 * m.c0 * m.c0);
        let d = required_d(m, t, eps)?;
        ReversalConfig::new(m, t, eps, d, tau2_mode)
    }

    /// No check of `d` against the threshold. Meant for probing the
    /// instability below it; [`time_reverse_f`] then fails with
    /// [`PatError::Overflow`] once the reversed spectrum leaves `f64` range.
    pub fn unchecked(t: f64, eps: f64, d: f64, tau2_mode: Tau2Mode) -> Self {
        ReversalConfig { t, eps, d, tau2_mode }
    }
}

fn norm_factor(dim: usize) -> f64 {
    (2.0 * PI).powf(-(dim as f64) / 2.0)
}

/// Monopole forward propagator `(Id + tau2 d/dt)[e^{-mu t} sin(theta t)/theta]`.
fn monopole_forward(s: &SymbolTable, i: usize, t: f64, tau2: f64) -> Scaled {
    let p = s.trig_parts(i, t);
    let mu = s.mu()[i];
    Scaled::new((1.0 - tau2 * mu) * p.sinct + tau2 * p.cos, p.log - mu * t)
}

fn monopole_backward(s: &SymbolTable, i: usize, t: f64, tau2: f64) -> Scaled {
    let p = s.trig_parts(i, t);
    let mu = s.mu()[i];
    Scaled::new(-((1.0 - tau2 * mu) * p.sinct - tau2 * p.cos), p.log + mu * t)
}

/// Time derivative of [`monopole_forward`]: the PAT forward propagator.
pub(crate) fn pat_forward_node(s: &SymbolTable, i: usize, t: f64, tau2: f64) -> Scaled {
    let p = s.trig_parts(i, t);
    let mu = s.mu()[i];
    let mant = (1.0 - 2.0 * tau2 * mu) * p.cos + (-mu + tau2 * (mu * mu - p.theta_sq)) * p.sinct;
    Scaled::new(mant, p.log - mu * t)
}

/// Minus the time derivative of [`monopole_backward`]: the PAT reversal
/// propagator for a positive `delta'` source.
pub(crate) fn pat_reverse_node(s: &SymbolTable, i: usize, t: f64, tau2: f64) -> Scaled {
    let p = s.trig_parts(i, t);
    let mu = s.mu()[i];
    let mant = (1.0 - 2.0 * tau2 * mu) * p.cos + (mu - tau2 * (mu * mu - p.theta_sq)) * p.sinct;
    Scaled::new(mant, p.log + mu * t)
}

fn materialize(
    s: &SymbolTable,
    scale: f64,
    node: impl Fn(usize) -> Scaled,
) -> Result<SpectralField> {
    let ln_bound = OVERFLOW_BOUND.ln();
    let mut values = Vec::with_capacity(s.len());
    for i in 0..s.len() {
        let v = node(i) * scale;
        let ln = v.ln_abs();
        if ln > ln_bound {
            return Err(PatError::Overflow {
                log_magnitude: ln,
                bound: OVERFLOW_BOUND,
            });
        }
        values.push(Complex64::new(v.value(), 0.0));
    }
    SpectralField::new(*s.grid(), values)
}

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(PatError::invalid(format!("t must be >= 0, got {t}")));
    }
    Ok(())
}

/// `M+(k, t)`: `p^ = phi^ M+` for the monopole problem.
pub fn forward_hat(s: &SymbolTable, t: f64, mode: Tau2Mode) -> Result<SpectralField> {
    check_time(t)?;
    let tau2 = mode.tau2(s.tau1());
    materialize(s, norm_factor(s.grid().dim), |i| monopole_forward(s, i, t, tau2))
}

/// `M-(k, t)`, the time-reversed monopole multiplier.
pub fn backward_hat(s: &SymbolTable, t: f64, mode: Tau2Mode) -> Result<SpectralField> {
    check_time(t)?;
    let tau2 = mode.tau2(s.tau1());
    materialize(s, norm_factor(s.grid().dim), |i| monopole_backward(s, i, t, tau2))
}

/// `d/dt M+(k, t)`.
pub fn dt_forward_hat(s: &SymbolTable, t: f64, mode: Tau2Mode) -> Result<SpectralField> {
    check_time(t)?;
    let tau2 = mode.tau2(s.tau1());
    materialize(s, norm_factor(s.grid().dim), |i| pat_forward_node(s, i, t, tau2))
}

/// `-d/dt M-(k, t)`: the reversal multiplier with the positive source sign
/// required for PAT.
pub fn pat_reverse_hat(s: &SymbolTable, t: f64, mode: Tau2Mode) -> Result<SpectralField> {
    check_time(t)?;
    let tau2 = mode.tau2(s.tau1());
    materialize(s, norm_factor(s.grid().dim), |i| pat_reverse_node(s, i, t, tau2))
}

fn check_support(phi: &RealField) -> Result<()> {
    match phi.support_in_padding() {
        0 => Ok(()),
        count => Err(PatError::SupportInPadding { count }),
    }
}

fn propagate(phi_hat: &SpectralField, s: &SymbolTable, t: f64, tau2: f64) -> Result<RealField> {
    let mult: Vec<f64> = (0..s.len())
        .map(|i| pat_forward_node(s, i, t, tau2).value())
        .collect();
    phi_hat.clone().multiply(&mult)?.ifft_real()
}

/// `phi_T = p(., T)` of the PAT problem with initial pressure `phi`.
pub fn pat_forward_field(phi: &RealField, m: &MediumParams, t: f64) -> Result<RealField> {
    check_support(phi)?;
    if !(t.is_finite() && t > 0.0) {
        return Err(PatError::invalid(format!("T must be positive, got {t}")));
    }
    let s = build_symbols(phi.grid(), m);
    propagate(&phi.fft(), &s, t, m.tau2)
}

/// Detector layout on the boundary of the imaging domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Acquisition {
    pub omega: Ball,
    pub n_detectors: usize,
    pub dt: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatData {
    pub phi_t: RealField,
    pub beta: DetectorSeries,
}

/// [`pat_forward_field`] plus the traces on the detector circle or sphere.
/// Detectors are snapped to the nearest grid node.
pub fn pat_forward(
    phi: &RealField,
    m: &MediumParams,
    t: f64,
    acq: &Acquisition,
) -> Result<PatData> {
    let phi_t = pat_forward_field(phi, m, t)?;
    if !(acq.dt.is_finite() && acq.dt > 0.0) {
        return Err(PatError::invalid("detector dt must be positive"));
    }
    let g = *phi.grid();
    let nodes: Vec<usize> = acq
        .omega
        .boundary_points(g.dim, acq.n_detectors)
        .iter()
        .map(|p| g.nearest_node(p))
        .collect();
    let positions: Vec<Point> = nodes.iter().map(|&i| g.coords(i)).collect();
    let s = build_symbols(&g, m);
    let phi_hat = phi.fft();
    let n_t = (t / acq.dt + 1e-9).floor() as usize + 1;
    let mut samples = vec![Vec::with_capacity(n_t); nodes.len()];
    for j in 0..n_t {
        let p = propagate(&phi_hat, &s, j as f64 * acq.dt, m.tau2)?;
        for (trace, &i) in samples.iter_mut().zip(&nodes) {
            trace.push(p.values()[i]);
        }
    }
    Ok(PatData {
        phi_t,
        beta: DetectorSeries::new(positions, acq.dt, samples)?,
    })
}

/// `F[R_D phi_T] = q(., T)`, the regularized time reversal of `phi_T`.
///
/// The exponentials of the reversal propagator and of `R_D` are combined
/// before evaluation; the call fails with [`PatError::Overflow`] if any
/// reversed coefficient exceeds [`OVERFLOW_BOUND`].
pub fn time_reverse_f(phi_t: &RealField, m: &MediumParams, cfg: &ReversalConfig) -> Result<RealField> {
    if !(cfg.t.is_finite() && cfg.t > 0.0) {
        return Err(PatError::invalid("reversal horizon must be positive"));
    }
    let s = build_symbols(phi_t.grid(), m);
    let tau2 = cfg.tau2_mode.tau2(m.tau1);
    apply_scaled(phi_t, |i| {
        let k = s.k()[i];
        pat_reverse_node(&s, i, cfg.t, tau2) * Scaled::exp(-cfg.d * k * k)
    })
}

/// Applies a DFT multiplier given in [`Scaled`] form. Each coefficient is
/// formed in log space; [`PatError::Overflow`] is returned if one exceeds
/// [`OVERFLOW_BOUND`].
pub(crate) fn apply_scaled(field: &RealField, node: impl Fn(usize) -> Scaled) -> Result<RealField> {
    let mut hat = field.fft();
    let ln_bound = OVERFLOW_BOUND.ln();
    let mut worst = f64::NEG_INFINITY;
    for (i, z) in hat.values_mut().iter_mut().enumerate() {
        let a = z.norm();
        if a == 0.0 {
            continue;
        }
        let mult = node(i);
        worst = worst.max(mult.ln_abs() + a.ln());
        *z = *z / a * (mult.mant * (mult.log + a.ln()).exp());
    }
    if worst > ln_bound {
        return Err(PatError::Overflow {
            log_magnitude: worst,
            bound: OVERFLOW_BOUND,
        });
    }
    hat.ifft_real()
}

/// `F1 = 2 F[R_D phi_T]` for `phi_T` generated from `phi`.
pub fn imaging_f1(phi: &RealField, m: &MediumParams, cfg: &ReversalConfig) -> Result<RealField> {
    let m = m.with_tau2_mode(cfg.tau2_mode);
    let phi_t = pat_forward_field(phi, &m, cfg.t)?;
    Ok(time_reverse_f(&phi_t, &m, cfg)?.scaled(2.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssTReport {
    /// `max |x - y|` over `x` in the domain and `y` in `supp(phi)`.
    pub needed: f64,
    /// `2 c0 T`.
    pub available: f64,
    pub satisfied: bool,
}

/// Checks `supp(phi) in B_{2 c0 T}(x)` for every `x` in `omega`.
pub fn check_ass_t(phi: &RealField, omega: &Ball, c0: f64, t: f64) -> AssTReport {
    let needed = phi
        .support_points()
        .iter()
        .map(|y| {
            let d = [
                y[0] - omega.center[0],
                y[1] - omega.center[1],
                y[2] - omega.center[2],
            ];
            (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt() + omega.radius
        })
        .fold(0.0, f64::max);
    let available = 2.0 * c0 * t;
    AssTReport {
        needed,
        available,
        satisfied: needed <= available,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GridSpec;

    fn table(tau1: f64) -> SymbolTable {
        let m = MediumParams::new(1500.0, tau1, Tau2Mode::Zero, 0.0).unwrap();
        build_symbols(&GridSpec::new(2, 16, 1e-3, [0.0; 3]).unwrap(), &m)
    }

    #[test]
    fn monopole_starts_at_rest() {
        let s = table(1e-7);
        let m = forward_hat(&s, 0.0, Tau2Mode::Zero).unwrap();
        assert!(m.values().iter().all(|z| z.norm() == 0.0));
        let p = dt_forward_hat(&s, 0.0, Tau2Mode::Zero).unwrap();
        let c = norm_factor(2);
        assert!(p.values().iter().all(|z| (z.re - c).abs() < 1e-15));
    }

    #[test]
    fn lossless_propagators() {
        let s = table(0.0);
        let t = 2e-6;
        let fwd = forward_hat(&s, t, Tau2Mode::Zero).unwrap();
        let bwd = backward_hat(&s, t, Tau2Mode::Zero).unwrap();
        let c = norm_factor(2);
        for (i, k) in s.k().iter().enumerate() {
            let want = if *k == 0.0 {
                c * t
            } else {
                c * (1500.0 * k * t).sin() / (1500.0 * k)
            };
            assert!((fwd.values()[i].re - want).abs() < 1e-15 * t);
            assert!((bwd.values()[i].re + want).abs() < 1e-15 * t);
        }
    }

    #[test]
    fn reversal_of_zero_is_zero() {
        let m = MediumParams::water();
        let g = GridSpec::new(2, 16, 1e-3, [0.0; 3]).unwrap();
        let cfg = ReversalConfig::at_threshold(&m, 1e-6, None, Tau2Mode::Zero).unwrap();
        let q = time_reverse_f(&RealField::zeros(g), &m, &cfg).unwrap();
        assert_eq!(q.max_abs(), 0.0);
    }

    #[test]
    fn checked_config_rejects_small_d() {
        let m = MediumParams::water();
        let t = 1e-4;
        let need = required_d(&m, t, 1e-3).unwrap();
        assert!(matches!(
            ReversalConfig::new(&m, t, 1e-3, 0.5 * need, Tau2Mode::Zero),
            Err(PatError::BelowRequiredD { .. })
        ));
        assert!(ReversalConfig::new(&m, t, 1e-3, need, Tau2Mode::Zero).is_ok());
    }

    #[test]
    fn padding_is_enforced() {
        let m = MediumParams::water();
        let g = GridSpec::new(2, 16, 1e-3, [0.0; 3]).unwrap();
        let mut v = vec![0.0; g.len()];
        v[1] = 1.0;
        let phi = RealField::new(g, v).unwrap();
        assert!(matches!(
            pat_forward_field(&phi, &m, 1e-6),
            Err(PatError::SupportInPadding { count: 1 })
        ));
    }
}
