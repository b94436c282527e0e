//! Uniform grids, DFT layout, radial symbols and the Gaussian regularization.

mod fft;
mod grid;
mod io;
mod regularize;
mod scaled;
mod symbols;

pub use fft::{fft_nd, FftDirection};
pub use grid::{GridSpec, RealField, SpectralField};
pub use io::{read_patgrid, read_patgrid_from, write_csv_slice, write_patgrid, write_patgrid_to};
pub use regularize::{apply_rd, gauss_hat, in_gd_margin, required_d, GdMarginReport};
pub use scaled::Scaled;
pub use symbols::{build_symbols, sinct, Branch, SymbolTable};
