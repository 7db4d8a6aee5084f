//! Stream elements and the audit state shared by every procedure.

use std::fmt;

use crate::error::{Error, Result};

/// Which kind of statistic a stream carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EvidenceKind {
    EValue,
    PValue,
}

impl fmt::Display for EvidenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EvidenceKind::EValue => f.write_str("e-value"),
            EvidenceKind::PValue => f.write_str("p-value"),
        }
    }
}

/// One stream element.
///
/// e-values are non-negative; an infinite e-value (a calibrator at p = 0, say)
/// is stored as `f64::MAX` so that `alpha * e` never produces NaN.
/// p-values lie in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub index: u64,
    pub kind: EvidenceKind,
    pub evidence: f64,
    /// `Some(true)` marks a non-null hypothesis.
    pub truth: Option<bool>,
}

impl Observation {
    pub fn e_value(index: u64, e: f64) -> Result<Self> {
        if e.is_nan() || e == f64::NEG_INFINITY {
            return Err(Error::NonFiniteEvidence { index, value: e });
        }
        if e < 0.0 {
            return Err(Error::invalid("e-value", e, "must be non-negative"));
        }
        Ok(Observation {
            index,
            kind: EvidenceKind::EValue,
            evidence: clamp_e(e),
            truth: None,
        })
    }

    pub fn p_value(index: u64, p: f64) -> Result<Self> {
        if !p.is_finite() {
            return Err(Error::NonFiniteEvidence { index, value: p });
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid("p-value", p, "must lie in [0, 1]"));
        }
        Ok(Observation {
            index,
            kind: EvidenceKind::PValue,
            evidence: p,
            truth: None,
        })
    }

    pub fn with_truth(mut self, non_null: bool) -> Self {
        self.truth = Some(non_null);
        self
    }
}

/// Maps `+inf` to the largest finite value.
#[inline]
pub fn clamp_e(e: f64) -> f64 {
    if e == f64::INFINITY {
        f64::MAX
    } else {
        e
    }
}

/// What a procedure recorded about a single step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepLedger {
    pub index: u64,
    pub alpha_t: f64,
    pub decision: bool,
    pub overshoot: f64,
    /// Charged cost, refund-adjusted where the procedure applies one.
    pub cost: f64,
    pub rejections_before: u64,
}

/// Full audit state of one running procedure.
///
/// `wealth` is the remaining budget `alpha - fdp_hat` entering the next
/// step; for LORD/SAFFRON-type rules it is exactly the `W_t` their update
/// multiplies.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcedureState {
    pub t: u64,
    pub rejections: u64,
    pub ledger: Vec<StepLedger>,
    pub wealth: f64,
    pub cumulative_fdp_hat: f64,
    /// Steps whose budget reached 1 or more (threshold at or below one).
    pub alpha_above_one: u64,
    pub(crate) sums: RunningSums,
    pub(crate) last_index: Option<u64>,
}

/// Running totals that make each step O(1).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub(crate) struct RunningSums {
    /// `sum C_j / (R_{j-1} + 1)`
    pub local_cost: f64,
    /// `sum min(O_j, alpha_j) / (R_{j-1} + 1)`, SCORE-LOND only.
    pub refund: f64,
    /// `sum C_j`
    pub total_cost: f64,
}

impl ProcedureState {
    pub fn new(alpha: f64) -> Self {
        ProcedureState {
            t: 0,
            rejections: 0,
            ledger: Vec::new(),
            wealth: alpha,
            cumulative_fdp_hat: 0.0,
            alpha_above_one: 0,
            sums: RunningSums::default(),
            last_index: None,
        }
    }
}
