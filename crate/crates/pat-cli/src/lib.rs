//! Configuration-driven runner for photoacoustic experiments.
//!
//! A config names a medium, a grid, a phantom and an ordered pipeline of
//! stages (`phantom`, `forward`, `shift`, `reverse`, `image`, `enhance`).
//! Every run writes `manifest.txt` with the derived constants it used and,
//! on failure, `error.txt`.

// `!(x > 0.0)` is deliberate: it rejects NaN along with the rest.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod diag;
pub mod error;
pub mod export;
pub mod manifest;
pub mod run;

pub use error::{CliError, Result};
