use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("size must be at least 1")]
    ZeroSize,

    #[error("size {n} exceeds the {kind} cap of {cap}")]
    SizeExceedsCap { n: usize, cap: usize, kind: &'static str },

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("operation requires real values: {what}")]
    RealnessViolation { what: String },

    #[error("matrix is not hermitian (max asymmetry {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("eigensolve did not converge after {sweeps} sweeps (off-norm {off:.3e})")]
    EigensolveDiverged { sweeps: usize, off: f64 },

    #[error("family is not Cauchy at level k = {level}: {detail}")]
    ExtractionFailure { level: u32, detail: String },

    #[error("approximant construction stalled at level {reached} of {target}: {detail}")]
    ApproximantStall { reached: u32, target: u32, detail: String },

    #[error("precondition failed: {what}")]
    PreconditionFailed { what: String },

    #[error("monotonicity violated: {what}")]
    NotMonotone { what: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no diagonal recorded for size {n}")]
    MissingSize { n: usize },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
