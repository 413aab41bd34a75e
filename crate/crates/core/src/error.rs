use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("degenerate prior: {0}")]
    DegeneratePrior(String),

    #[error("normalization conflict: {0}")]
    NormalizationConflict(String),

    #[error("stopping region touches the edge of the m-grid (attempted m_bar: {attempted:?})")]
    GridTooNarrow { attempted: Vec<f64> },

    #[error("extracted boundaries are non-monotone beyond one grid cell at row {row}: {detail}")]
    GridResolution { row: usize, detail: String },

    #[error("boundary solution and prior disagree: {0}")]
    Mismatch(String),

    #[error("welfare floor {target} is unreachable; feasible welfare range is [{min_welfare}, {max_welfare}]")]
    Infeasible {
        target: f64,
        min_welfare: f64,
        max_welfare: f64,
    },

    #[error("scenario error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// Fails with `InvalidParameter` unless `cond` holds.
pub(crate) fn ensure(cond: bool, name: &'static str, reason: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(invalid(name, reason()))
    }
}
