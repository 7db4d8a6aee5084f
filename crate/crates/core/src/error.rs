use std::path::PathBuf;

use thiserror::Error;

use crate::types::EvidenceKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value outside its admissible range.
    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: String,
        reason: &'static str,
    },

    #[error("procedure {procedure} accepts {expected} evidence, got {found}")]
    EvidenceKindMismatch {
        procedure: &'static str,
        expected: EvidenceKind,
        found: EvidenceKind,
    },

    #[error("non-finite evidence {value} at index {index}")]
    NonFiniteEvidence { index: u64, value: f64 },

    #[error("observation index {index} does not follow previous index {previous}")]
    IndexOrder { index: u64, previous: u64 },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    /// Remaining alpha-wealth went below the numerical floor. The update
    /// rules keep it non-negative, so this always indicates a bug.
    #[error("wealth underflow at step {step}: {wealth:e}")]
    WealthUnderflow { step: u64, wealth: f64 },

    #[error("missing context for {0} likelihood ratio")]
    MissingContext(&'static str),

    #[error("degenerate conformal denominator: all scores are zero")]
    DegenerateCalibration,

    #[error("truth labels missing at step {0}")]
    MissingTruth(u64),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("{path}: row {row}: {message}")]
    Ingest {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, value: impl ToString, reason: &'static str) -> Self {
        Error::InvalidParameter {
            name,
            value: value.to_string(),
            reason,
        }
    }
}

/// Checks `x` lies in the open unit interval.
pub(crate) fn check_unit_open(name: &'static str, x: f64) -> Result<f64> {
    if x > 0.0 && x < 1.0 {
        Ok(x)
    } else {
        Err(Error::invalid(name, x, "must lie in (0, 1)"))
    }
}
