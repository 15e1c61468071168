use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("spacetime dimension {0} is outside the supported range 2..=4")]
    InvalidDimension(usize),

    #[error("index slot {0} out of range (a rank-2 array has slots 0 and 1)")]
    SlotOutOfRange(usize),

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("coordinate power {0} exceeds the supported maximum of 3")]
    PowerTooLarge(u32),

    #[error("unsupported integrand: {0}")]
    UnsupportedIntegrand(String),

    #[error("expression parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("not a Maxwell solution: max |d_mu F^mu nu| = {residual:e}")]
    NotAMaxwellSolution { residual: f64 },

    #[error("non-periodic input cannot be differenced across the periodic wrap")]
    NonPeriodicInput,

    #[error("time step {dt} violates the stability bound {limit}")]
    StabilityViolation { dt: f64, limit: f64 },

    #[error("inadmissible ansatz: symmetric part of dS/dA does not vanish ({0})")]
    InadmissibleAnsatz(String),

    #[error("configuration time {config} does not match functional time {functional}")]
    TimeMismatch { config: f64, functional: f64 },

    #[error("lattice mismatch: {0}")]
    LatticeMismatch(String),

    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("scenario {}: line {line}: {msg}", path.as_ref().map(|p| p.display().to_string()).unwrap_or_else(|| "<inline>".into()))]
    Scenario {
        path: Option<PathBuf>,
        line: usize,
        msg: String,
    },

    #[error("csv: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
