use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by scenario construction, the channel models and the game solver.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty provider set")]
    EmptyProviderSet,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("resource block {rb} is assigned to more than one provider")]
    DoubleAssignedBlock { rb: usize },

    #[error("allocation shape mismatch: expected {expected_rbs}x{expected_providers}, got {rbs}x{providers}")]
    AllocationShape {
        expected_rbs: usize,
        expected_providers: usize,
        rbs: usize,
        providers: usize,
    },

    #[error("invalid MCS table: {0}")]
    InvalidMcsTable(String),

    #[error("buyer best response did not settle after {sweeps} sweeps (residual {residual:e})")]
    BestResponseNotConverged {
        sweeps: usize,
        residual: f64,
        last: Vec<f64>,
    },

    #[error("provider {provider} sells {amount} units with a zero demand coefficient")]
    DegenerateDemand { provider: usize, amount: f64 },

    #[error("config file {path}: {reason}")]
    Config { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// Rejects NaN and values not strictly above zero.
pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("must be positive and finite, got {value}")))
    }
}

pub(crate) fn ensure_nonnegative(name: &'static str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("must be nonnegative and finite, got {value}")))
    }
}
