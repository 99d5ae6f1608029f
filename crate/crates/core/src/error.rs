use std::path::PathBuf;

use chrono::NaiveDate;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("missing required column: {0}")]
    MissingColumn(&'static str),

    #[error("no parseable rows in input")]
    NoRows,

    #[error("duplicate date {0}")]
    DuplicateDate(NaiveDate),

    #[error("dates not strictly increasing at {0}")]
    UnorderedDates(NaiveDate),

    #[error("invalid date {value:?} on line {line}")]
    InvalidDate { line: u64, value: String },

    #[error("series too short: need at least {needed} records, got {got}")]
    SeriesTooShort { needed: usize, got: usize },

    #[error("train fraction must lie strictly between 0 and 1, got {0}")]
    InvalidFraction(f64),

    #[error("constant channel: {0}")]
    ConstantChannel(&'static str),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("price at record {0} is not a positive finite number")]
    InvalidPrice(usize),

    #[error("non-finite value at index {0}")]
    NonFinite(usize),

    #[error("empty input")]
    Empty,

    #[error("division by zero: actual value at index {0} is zero")]
    ZeroActual(usize),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("objective returned non-finite fitness {value} after {evaluations} evaluations")]
    NonFiniteFitness { value: f64, evaluations: u64 },

    #[error("malformed predictions file {}: {reason}", path.display())]
    MalformedPredictions { path: PathBuf, reason: String },

    #[error("cannot open {}", path.display())]
    Open { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
