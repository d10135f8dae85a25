//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by matrix construction, prox evaluation, schedule
/// validation, solver runs, and config parsing.
#[derive(Debug, Error)]
pub enum Error {
    #[error("index ({i}, {j}) out of range for {n} x {d} matrix")]
    IndexOutOfRange { i: usize, j: usize, n: usize, d: usize },

    #[error("duplicate entry at ({i}, {j})")]
    DuplicateEntry { i: usize, j: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty domain: interval [{lo}, {hi}] with lo > hi")]
    EmptyDomain { lo: f64, hi: f64 },

    #[error("nonpositive step size {tau}")]
    NonpositiveStep { tau: f64 },

    #[error("unsupported conjugate family: {0}")]
    UnsupportedFamily(String),

    #[error("zero row {0}: sampling probability undefined")]
    ZeroRow(usize),

    #[error("empty column {0}: coordinate would never be updated")]
    EmptyColumn(usize),

    #[error("schedule requires {what}")]
    ScheduleRequirement { what: String },

    #[error("step-size condition violated at row {row}: {detail}")]
    StepCondition { row: usize, detail: String },

    #[error("singular system at pivot {0}")]
    SingularSystem(usize),

    #[error("reference solve exhausted budget: gap {achieved:.3e} > target {target:.3e}")]
    BudgetExhausted { achieved: f64, target: f64 },

    #[error("non-finite value ({what}) at iteration {k}")]
    NonFinite { what: String, k: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("output rule error: {0}")]
    OutputRule(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
