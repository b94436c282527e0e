//! The convolution operator `J_T`, the operator `A` with
//! `A(R_D phi) = F1 / 2`, and the damped spectral solver for `A`.

use std::io::Write;

use crate::error::{PatError, Result};
use crate::medium::Tau2Mode;
use crate::propagation::apply_scaled;
use crate::spectral::{RealField, Scaled, SymbolTable};

/// Multipliers of `J_T` and `A` on the k-nodes of one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSymbols {
    t: f64,
    tau2_mode: Tau2Mode,
    kc: Option<f64>,
    k: Vec<f64>,
    a_scaled: Vec<Scaled>,
    j_hat: Vec<f64>,
    a_hat: Vec<f64>,
}

fn j_node(s: &SymbolTable, i: usize, t: f64) -> Scaled {
    let p = s.trig_parts(i, t);
    Scaled::new(p.sinct, p.log).square()
}

fn a_node(s: &SymbolTable, i: usize, t: f64, tau2: f64) -> Scaled {
    let (c0, k) = (s.c0(), s.k()[i]);
    let lead = (1.0 - tau2 * tau2 * c0 * c0 * k * k).powi(2);
    let j = j_node(s, i, t);
    Scaled::new(lead * (-j.log).exp() - c0 * c0 * k * k * j.mant, j.log)
}

/// `sin^2(theta T)/theta^2` on every node; `sinh^2(theta0 T)/theta0^2` where
/// `k > kc`.
pub fn build_j_hat(s: &SymbolTable, t: f64) -> Vec<f64> {
    (0..s.len()).map(|i| j_node(s, i, t).value()).collect()
}

/// `(1 - tau2^2 c0^2 k^2)^2 - c0^2 k^2 J^`.
pub fn build_a_hat(s: &SymbolTable, t: f64, mode: Tau2Mode) -> Vec<f64> {
    let tau2 = mode.tau2(s.tau1());
    (0..s.len()).map(|i| a_node(s, i, t, tau2).value()).collect()
}

impl OperatorSymbols {
    pub fn new(s: &SymbolTable, t: f64, mode: Tau2Mode) -> Result<Self> {
        if !(t.is_finite() && t > 0.0) {
            return Err(PatError::invalid(format!("T must be positive, got {t}")));
        }
        let tau2 = mode.tau2(s.tau1());
        let a_scaled: Vec<Scaled> = (0..s.len()).map(|i| a_node(s, i, t, tau2)).collect();
        Ok(OperatorSymbols {
            t,
            tau2_mode: mode,
            kc: s.kc(),
            k: s.k().to_vec(),
            j_hat: (0..s.len()).map(|i| j_node(s, i, t).value()).collect(),
            a_hat: a_scaled.iter().map(Scaled::value).collect(),
            a_scaled,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn tau2_mode(&self) -> Tau2Mode {
        self.tau2_mode
    }

    pub fn k(&self) -> &[f64] {
        &self.k
    }

    pub fn j_hat(&self) -> &[f64] {
        &self.j_hat
    }

    pub fn a_hat(&self) -> &[f64] {
        &self.a_hat
    }
}

/// `J_T xi`. With `d = Some(D)` the input is taken as the raw field and
/// `J_T R_D xi` is returned, the two multipliers being combined before
/// evaluation.
pub fn apply_jt(xi: &RealField, s: &SymbolTable, t: f64, d: Option<f64>) -> Result<RealField> {
    if !(t.is_finite() && t > 0.0) {
        return Err(PatError::invalid(format!("T must be positive, got {t}")));
    }
    let d = d.unwrap_or(0.0);
    apply_scaled(xi, |i| {
        let k = s.k()[i];
        j_node(s, i, t) * Scaled::exp(-d * k * k)
    })
}

/// Quadrature of `int |J^(k) e^{-D k^2}|^2 dk` over the k-nodes of the grid.
pub fn hs_norm_j(s: &SymbolTable, t: f64, d: f64) -> f64 {
    let dk_vol = s.grid().dk().powi(s.grid().dim as i32);
    (0..s.len())
        .map(|i| {
            let k = s.k()[i];
            (j_node(s, i, t) * Scaled::exp(-d * k * k)).square().value()
        })
        .sum::<f64>()
        * dk_vol
}

/// Multiplication by `A^`. The input is expected to be `R_D phi`.
pub fn apply_a(phi_d: &RealField, ops: &OperatorSymbols) -> Result<RealField> {
    check_len(phi_d, ops)?;
    apply_scaled(phi_d, |i| ops.a_scaled[i])
}

/// `1e-6 max A^2` over the oscillatory nodes `k <= kc`. Beyond `kc` the
/// symbol grows exponentially and would swamp the damping.
pub fn default_lambda(ops: &OperatorSymbols) -> f64 {
    let kc = ops.kc.unwrap_or(f64::INFINITY);
    1e-6 * ops
        .k
        .iter()
        .zip(&ops.a_hat)
        .filter(|(k, a)| **k <= kc && a.is_finite())
        .fold(0.0f64, |m, (_, a)| m.max(a * a))
}

/// Damped spectral inversion `A^ f^ / (A^2 + lambda)`; `lambda = None`
/// selects [`default_lambda`].
pub fn solve_operator_eq(
    f: &RealField,
    ops: &OperatorSymbols,
    lambda: Option<f64>,
) -> Result<RealField> {
    check_len(f, ops)?;
    let lambda = lambda.unwrap_or_else(|| default_lambda(ops));
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(PatError::invalid(format!("lambda must be positive, got {lambda}")));
    }
    let mult: Vec<f64> = ops
        .a_hat
        .iter()
        .map(|&a| if a.is_finite() { a / (a * a + lambda) } else { 0.0 })
        .collect();
    f.fft().multiply(&mult)?.ifft_real()
}

fn check_len(f: &RealField, ops: &OperatorSymbols) -> Result<()> {
    if f.grid().len() != ops.k.len() {
        return Err(PatError::GridMismatch("field and operator symbols".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroKind {
    /// `A^` changes sign between neighbouring shells.
    SignChange,
    /// `A^` touches zero without changing sign.
    Touch,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroShell {
    pub index: usize,
    pub k_radius: f64,
    pub kind: ZeroKind,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ZeroReport {
    pub shells: Vec<ZeroShell>,
}

impl ZeroReport {
    pub fn len(&self) -> usize {
        self.shells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shells.is_empty()
    }

    pub fn radii(&self) -> Vec<f64> {
        self.shells.iter().map(|s| s.k_radius).collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "shell_index, k_radius")?;
        for s in &self.shells {
            writeln!(w, "{}, {:e}", s.index, s.k_radius)?;
        }
        Ok(())
    }
}

/// Relative depth below which a local minimum of `A^` counts as a zero.
const TOUCH_TOL: f64 = 1e-3;
const SNAP_TOL: f64 = 1e-12;

/// Radial scan of `A^` over the distinct wavenumber radii of the grid.
///
/// Sign changes are located by linear interpolation. Non-negative local
/// minima are located by a parabola through the three samples around them
/// and reported when the vertex value is below `TOUCH_TOL * max |A^|`.
pub fn symbol_zero_report(ops: &OperatorSymbols) -> ZeroReport {
    let mut pairs: Vec<(f64, f64)> = ops
        .k
        .iter()
        .zip(&ops.a_hat)
        .filter(|(_, a)| a.is_finite())
        .map(|(&k, &a)| (k, a))
        .collect();
    pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
    pairs.dedup_by(|p, q| (p.0 - q.0).abs() <= 1e-12 * q.0.max(1.0));
    let scale = pairs.iter().fold(0.0f64, |m, p| m.max(p.1.abs()));
    // Round-off around a double zero must not read as a sign change.
    let snapped: Vec<bool> = (0..pairs.len())
        .map(|j| {
            let lo = pairs[j.saturating_sub(1)].1.abs();
            let hi = pairs.get(j + 1).map_or(0.0, |p| p.1.abs());
            pairs[j].1.abs() <= SNAP_TOL * lo.max(hi)
        })
        .collect();
    for (p, snap) in pairs.iter_mut().zip(snapped) {
        if snap {
            p.1 = 0.0;
        }
    }
    let mut shells = Vec::new();
    let mut push = |k_radius: f64, kind: ZeroKind| {
        shells.push(ZeroShell {
            index: shells.len(),
            k_radius,
            kind,
        })
    };
    for j in 0..pairs.len().saturating_sub(1) {
        let (k0, a0) = pairs[j];
        let (k1, a1) = pairs[j + 1];
        if a0 * a1 < 0.0 {
            push(k0 + (k1 - k0) * a0 / (a0 - a1), ZeroKind::SignChange);
        } else if a1 == 0.0 && a0 != 0.0 {
            let after = pairs[j + 1..].iter().map(|p| p.1).find(|&a| a != 0.0);
            let kind = match after {
                Some(a2) if a2 * a0 < 0.0 => ZeroKind::SignChange,
                _ => ZeroKind::Touch,
            };
            push(k1, kind);
        } else if j > 0 && a0 > 0.0 {
            let (km, am) = pairs[j - 1];
            if am > 0.0 && a0 <= am && a0 <= a1 {
                if let Some((kv, av)) = parabola_vertex((km, am), (k0, a0), (k1, a1)) {
                    if av <= TOUCH_TOL * scale {
                        push(kv, ZeroKind::Touch);
                    }
                }
            }
        }
    }
    ZeroReport { shells }
}

fn parabola_vertex(p0: (f64, f64), p1: (f64, f64), p2: (f64, f64)) -> Option<(f64, f64)> {
    let d01 = (p1.1 - p0.1) / (p1.0 - p0.0);
    let d12 = (p2.1 - p1.1) / (p2.0 - p1.0);
    let c2 = (d12 - d01) / (p2.0 - p0.0);
    if c2 <= 0.0 {
        return None;
    }
    // p(k) = p0.1 + d01 (k - k0) + c2 (k - k0)(k - k1)
    let kv = 0.5 * (p0.0 + p1.0 - d01 / c2);
    let av = p0.1 + d01 * (kv - p0.0) + c2 * (kv - p0.0) * (kv - p1.0);
    Some((kv, av.max(0.0)))
}
