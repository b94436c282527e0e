use std::f64::consts::PI;

use super::grid::{RealField, SpectralField};
use crate::error::{PatError, Result};
use crate::medium::MediumParams;

/// `(2 pi)^{-dim/2} e^{-D k^2}`, the transform of the Gaussian `g_D`.
pub fn gauss_hat(k: f64, d: f64, dim: usize) -> f64 {
    (2.0 * PI).powf(-(dim as f64) / 2.0) * (-d * k * k).exp()
}

/// `R_D phi = g_D * phi`, computed as the DFT multiplier `e^{-D k^2}`.
pub fn apply_rd(phi: &RealField, d: f64) -> Result<RealField> {
    if !(d.is_finite() && d > 0.0) {
        return Err(PatError::invalid(format!("D must be positive, got {d}")));
    }
    let mult: Vec<f64> = phi.grid().k_abs().iter().map(|k| (-d * k * k).exp()).collect();
    phi.fft().multiply(&mult)?.ifft_real()
}

/// Smallest admissible regularization area `2 (c0/kc + eps) T`.
pub fn required_d(m: &MediumParams, t: f64, eps: f64) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return Err(PatError::invalid(format!("T must be positive, got {t}")));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(PatError::invalid(format!("eps must be positive, got {eps}")));
    }
    Ok((m.tau1 * m.c0 * m.c0 + 2.0 * eps) * t)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GdMarginReport {
    /// `(shell radius, sup of |phi^| e^{D k^2} on the shell)`, by increasing
    /// radius. Shell `j` collects nodes with `round(|k|/dk) = j`.
    pub shells: Vec<(f64, f64)>,
}

impl GdMarginReport {
    pub fn max(&self) -> f64 {
        self.shells.iter().fold(0.0, |m, s| m.max(s.1))
    }
}

pub fn in_gd_margin(phi_hat: &SpectralField, d: f64) -> GdMarginReport {
    let g = phi_hat.grid();
    let dk = g.dk();
    let k = g.k_abs();
    let n_shells = k.iter().map(|k| (k / dk).round() as usize).max().unwrap_or(0) + 1;
    let mut sup = vec![0.0f64; n_shells];
    for (z, k) in phi_hat.values().iter().zip(&k) {
        let a = z.norm();
        if a > 0.0 {
            let j = (k / dk).round() as usize;
            sup[j] = sup[j].max((a.ln() + d * k * k).exp());
        }
    }
    GdMarginReport {
        shells: sup
            .into_iter()
            .enumerate()
            .map(|(j, s)| (j as f64 * dk, s))
            .collect(),
    }
}
