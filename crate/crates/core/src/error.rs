use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("field has {found} values but the grid has {expected} interior nodes")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// The explicit scheme produced a non-finite or huge value; `t` is the
    /// last time level that was still valid.
    #[error("solution blew up after t = {t}")]
    BlowUp { t: f64 },

    #[error("singular tridiagonal system: pivot {pivot:e} at row {row}")]
    SingularJacobian { row: usize, pivot: f64 },

    #[error("need at least {needed} usable samples, found {found}")]
    InsufficientSamples { needed: usize, found: usize },

    #[error("series contains negative values")]
    NonPositiveValues,

    #[error("only {found} probe samples have a measurable energy gap (need 4)")]
    DegenerateSamples { found: usize },

    #[error("alpha = {0} is outside [0, 1)")]
    InvalidAlpha(f64),

    #[error("diagnostics rows are not consecutive samples of one run")]
    NonConsecutiveRows,

    #[error("series too short: {0}")]
    SeriesTooShort(String),
}
