use std::path::PathBuf;

use pat_core::PatError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Core(#[from] PatError),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// 1 for configuration and environment problems, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Core(e) => match e {
                PatError::InvalidParameter(_)
                | PatError::Parse(_)
                | PatError::BelowRequiredD { .. }
                | PatError::PhantomOutsideDomain(_)
                | PatError::SupportInPadding { .. }
                | PatError::GridMismatch(_)
                | PatError::Io { .. } => 1,
                PatError::Domain(_)
                | PatError::NonFinite(_)
                | PatError::Overflow { .. }
                | PatError::ShiftExceedsWindow { .. } => 2,
            },
        }
    }

    /// Short machine-readable tag for error records.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Core(e) => match e {
                PatError::InvalidParameter(_) => "invalid_parameter",
                PatError::Parse(_) => "parse",
                PatError::BelowRequiredD { .. } => "below_required_d",
                PatError::PhantomOutsideDomain(_) => "phantom_outside_domain",
                PatError::SupportInPadding { .. } => "support_in_padding",
                PatError::GridMismatch(_) => "grid_mismatch",
                PatError::Io { .. } => "io",
                PatError::Domain(_) => "domain",
                PatError::NonFinite(_) => "non_finite",
                PatError::Overflow { .. } => "overflow",
                PatError::ShiftExceedsWindow { .. } => "shift_exceeds_window",
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
