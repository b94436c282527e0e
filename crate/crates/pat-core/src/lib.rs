//! Photoacoustic forward modelling, regularized time reversal and image
//! enhancement for thermo-viscous media.
//!
//! The crate is organised bottom-up:
//!
//! * [`medium`]: attenuation laws, frequency-domain Green functions and the
//!   causal/non-causal time shift of detector data.
//! * [`spectral`]: grids, DFT plumbing, the radial symbols `mu`, `theta` and
//!   the Gaussian regularization `R_D`.
//! * [`propagation`]: k-space propagators, PAT data generation, time
//!   reversal and the imaging functional `F1`.
//! * [`inverse`]: the operators `J_T` and `A`, their diagnostics and the
//!   damped spectral solver.
//! * [`fdtd`]: explicit solver of the auxiliary fourth-order wave equation,
//!   phantoms and the image `I`.

// `!(x > 0.0)` is deliberate: it rejects NaN along with the rest.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fdtd;
pub mod inverse;
pub mod kv;
pub mod medium;
pub mod propagation;
pub mod spectral;

pub use error::{PatError, Result};
