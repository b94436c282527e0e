use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, PatError>;

#[derive(Debug, Error)]
pub enum PatError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// A spectral magnitude left the representable range. `log_magnitude` is
    /// the natural log of the offending value.
    #[error("spectral overflow: ln|value| = {log_magnitude:.3e} exceeds ln({bound:e})")]
    Overflow { log_magnitude: f64, bound: f64 },

    #[error("regularization area D = {d:e} is below the stability threshold {required:e}")]
    BelowRequiredD { d: f64, required: f64 },

    #[error("field support reaches the padding region ({count} nodes)")]
    SupportInPadding { count: usize },

    #[error("time shift {shift:e} s exceeds the recorded window {window:e} s")]
    ShiftExceedsWindow { shift: f64, window: f64 },

    #[error("phantom leaks outside the imaging domain: {0}")]
    PhantomOutsideDomain(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl PatError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        PatError::InvalidParameter(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        PatError::Io {
            path: path.into(),
            source,
        }
    }
}
