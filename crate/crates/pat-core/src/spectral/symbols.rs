use num_complex::Complex64;

use super::grid::GridSpec;
use crate::medium::MediumParams;

/// Radial symbols of the thermo-viscous propagator on every k-node.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolTable {
    grid: GridSpec,
    c0: f64,
    tau1: f64,
    /// `2/(tau1 c0)`; `None` in the lossless limit.
    kc: Option<f64>,
    k: Vec<f64>,
    mu: Vec<f64>,
    theta: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Branch {
    /// `k <= kc`: `theta` real and nonnegative.
    Oscillatory(f64),
    /// `k > kc`: `theta = i theta0` with `theta0 > 0`.
    Evanescent(f64),
}

/// `sin(theta t)`, `cos(theta t)` and `sin(theta t)/theta` for one node with a
/// common exponential factor pulled out: every returned quantity must be
/// multiplied by `e^{log}`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TrigParts {
    pub sinct: f64,
    pub cos: f64,
    pub theta_sq: f64,
    pub log: f64,
}

pub fn build_symbols(grid: &GridSpec, m: &MediumParams) -> SymbolTable {
    let c0 = m.c0;
    let kc = m.kc();
    let k = grid.k_abs();
    let (mu, theta) = match kc {
        None => (
            vec![0.0; k.len()],
            k.iter().map(|&k| Complex64::new(c0 * k, 0.0)).collect(),
        ),
        Some(kc) => k
            .iter()
            .map(|&k| {
                let r = k / kc;
                let mu = c0 * k * r;
                let theta = if r <= 1.0 {
                    Complex64::new(c0 * k * ((1.0 - r) * (1.0 + r)).sqrt(), 0.0)
                } else {
                    Complex64::new(0.0, c0 * k * ((r - 1.0) * (r + 1.0)).sqrt())
                };
                (mu, theta)
            })
            .unzip(),
    };
    SymbolTable {
        grid: *grid,
        c0,
        tau1: m.tau1,
        kc,
        k,
        mu,
        theta,
    }
}

impl SymbolTable {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn tau1(&self) -> f64 {
        self.tau1
    }

    pub fn kc(&self) -> Option<f64> {
        self.kc
    }

    pub fn k(&self) -> &[f64] {
        &self.k
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn theta(&self) -> &[Complex64] {
        &self.theta
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    pub fn branch(&self, i: usize) -> Branch {
        let th = self.theta[i];
        if th.im > 0.0 {
            Branch::Evanescent(th.im)
        } else {
            Branch::Oscillatory(th.re)
        }
    }

    pub fn has_evanescent_nodes(&self) -> bool {
        self.theta.iter().any(|t| t.im > 0.0)
    }

    pub(crate) fn trig_parts(&self, i: usize, t: f64) -> TrigParts {
        match self.branch(i) {
            Branch::Oscillatory(th) => TrigParts {
                sinct: sinct(Complex64::new(th, 0.0), t).re,
                cos: (th * t).cos(),
                theta_sq: th * th,
                log: 0.0,
            },
            Branch::Evanescent(th0) => {
                let x = th0 * t;
                let e = (-2.0 * x).exp();
                TrigParts {
                    sinct: -(-2.0 * x).exp_m1() / (2.0 * th0),
                    cos: 0.5 * (1.0 + e),
                    theta_sq: -th0 * th0,
                    log: x,
                }
            }
        }
    }
}

/// `sin(theta t)/theta`, with the removable singularity at `theta = 0` and a
/// stable evaluation of `sinh(theta0 t)/theta0` for `theta = i theta0`.
pub fn sinct(theta: Complex64, t: f64) -> Complex64 {
    let z = theta * t;
    if z.norm() < 1e-6 {
        return t * (1.0 - z * z / 6.0);
    }
    if theta.im == 0.0 {
        return Complex64::new((theta.re * t).sin() / theta.re, 0.0);
    }
    if theta.re == 0.0 {
        let th0 = theta.im;
        let x = th0 * t;
        let v = if x < 20.0 {
            x.sinh() / th0
        } else {
            (x - (2.0 * th0).ln()).exp() * -(-2.0 * x).exp_m1()
        };
        return Complex64::new(v, 0.0);
    }
    z.sin() / theta
}
