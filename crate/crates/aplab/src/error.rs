//! Crate-wide error type.
//!
//! Errors split into three families: contract violations on inputs
//! (preconditions, domain ranges, group mismatches), search failures of the
//! heuristic machinery (sift budgets, regular-width scans, instance
//! generation), and internal assertion failures. The last family is the
//! falsifiable content of the increment pipelines: an `AssertionFailed`
//! carries the failing quantity and must never fire on inputs that satisfy
//! the hypotheses.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NonPrime(u64),
    #[error("group order {0} exceeds the dense-storage cap 2^20")]
    SizeLimit(u64),
    #[error("operands live on different groups")]
    GroupMismatch,
    #[error("operation unsupported for this group kind: {0}")]
    UnsupportedKind(&'static str),
    #[error("dilate by {k} invalid: gcd({k}, {n}) != 1")]
    InvalidDilate { k: u64, n: u64 },
    #[error("even-order obstruction: {0}")]
    EvenOrder(&'static str),
    #[error("empty set where a normalized measure is required")]
    EmptySet,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("instance generation failed after {retries} retries: {reason}")]
    GenerationFailure { retries: u32, reason: String },
    #[error("almost-period scan produced an empty set: {0}")]
    BootstrapFailure(String),
    #[error("internal assertion `{name}` failed: value {value} vs bound {bound}")]
    AssertionFailed {
        name: &'static str,
        value: f64,
        bound: f64,
    },
    #[error("sift oracle incomplete: best achieved {achieved} < required {required}")]
    SiftFailure { achieved: f64, required: f64 },
    #[error("no regular width found in [{lo}, {hi}]; worst ratios: {ratios:?}")]
    RegularSearchFailure {
        lo: f64,
        hi: f64,
        ratios: Vec<f64>,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
