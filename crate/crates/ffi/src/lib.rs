//! C ABI over the `score-fdr` procedures and calibrators.
//!
//! Procedures live behind an opaque `ScoreProcedure` handle. Every fallible
//! function returns a [`ScoreStatus`]; on failure the message is available
//! from [`score_last_error`] on the same thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use score_fdr::calibration::{conformal_evalue, vovk_p_to_e, CalibrationSet};
use score_fdr::error::Error;
use score_fdr::procedures::{Procedure, ProcedureConfig, ProcedureKind};
use score_fdr::schedule::Schedule;
use score_fdr::types::{EvidenceKind, Observation};

/// Result codes. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    EvidenceKindMismatch = 3,
    NonFiniteEvidence = 4,
    IndexOrder = 5,
    WealthUnderflow = 6,
    DegenerateCalibration = 7,
    Panic = 98,
    Other = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreProcedureId {
    ELond = 0,
    ScoreLond = 1,
    ELord = 2,
    ScoreLord = 3,
    ScorePlusLord = 4,
    ESaffron = 5,
    ScoreSaffron = 6,
    ScorePlusSaffron = 7,
    PLond = 8,
    PLord = 9,
    PSaffron = 10,
}

impl From<ScoreProcedureId> for ProcedureKind {
    fn from(id: ScoreProcedureId) -> Self {
        ProcedureKind::ALL[id as usize]
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreScheduleKind {
    /// Use the procedure's default (or leave unset when it takes none).
    Default = 0,
    /// `a` is the constant.
    Constant = 1,
    /// `a` is the ratio q.
    Geometric = 2,
    /// `a, b, c` are omega1, phi, psi.
    Rai = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreSchedule {
    pub kind: ScoreScheduleKind,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreProcedureConfig {
    pub procedure: ScoreProcedureId,
    pub alpha: f64,
    pub gamma: ScoreSchedule,
    pub omega: ScoreSchedule,
    pub lambda: ScoreSchedule,
}

/// What one step recorded, plus the state after it.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScoreStepResult {
    pub index: u64,
    pub alpha_t: f64,
    /// 1 when the hypothesis was rejected.
    pub decision: u8,
    pub overshoot: f64,
    pub cost: f64,
    pub rejections: u64,
    pub fdp_hat: f64,
    pub wealth: f64,
}

/// Opaque procedure handle.
pub struct ScoreProcedure {
    inner: Procedure,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(err: &Error) -> ScoreStatus {
    match err {
        Error::InvalidParameter { .. } => ScoreStatus::InvalidParameter,
        Error::EvidenceKindMismatch { .. } => ScoreStatus::EvidenceKindMismatch,
        Error::NonFiniteEvidence { .. } => ScoreStatus::NonFiniteEvidence,
        Error::IndexOrder { .. } => ScoreStatus::IndexOrder,
        Error::WealthUnderflow { .. } => ScoreStatus::WealthUnderflow,
        Error::DegenerateCalibration => ScoreStatus::DegenerateCalibration,
        _ => ScoreStatus::Other,
    }
}

fn fail(err: Error) -> ScoreStatus {
    set_error(&err.to_string());
    status_of(&err)
}

fn null(what: &str) -> ScoreStatus {
    set_error(&format!("null pointer: {what}"));
    ScoreStatus::NullPointer
}

fn guard(f: impl FnOnce() -> ScoreStatus) -> ScoreStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            ScoreStatus::Panic
        }
    }
}

fn schedule(s: &ScoreSchedule) -> Result<Option<Schedule>, Error> {
    Ok(match s.kind {
        ScoreScheduleKind::Default => None,
        ScoreScheduleKind::Constant => Some(Schedule::constant(s.a)?),
        ScoreScheduleKind::Geometric => Some(Schedule::geometric(s.a)?),
        ScoreScheduleKind::Rai => Some(Schedule::rai(s.a, s.b, s.c)?),
    })
}

fn to_config(c: &ScoreProcedureConfig) -> Result<ProcedureConfig, Error> {
    let mut cfg = ProcedureConfig::new(c.procedure.into(), c.alpha)?;
    if let Some(g) = schedule(&c.gamma)? {
        cfg = cfg.with_gamma(g)?;
    }
    if let Some(o) = schedule(&c.omega)? {
        cfg = cfg.with_omega(o)?;
    }
    if let Some(l) = schedule(&c.lambda)? {
        cfg = cfg.with_lambda(l)?;
    }
    Ok(cfg)
}

const DEFAULT_SCHEDULE: ScoreSchedule = ScoreSchedule {
    kind: ScoreScheduleKind::Default,
    a: 0.0,
    b: 0.0,
    c: 0.0,
};

/// Config for `procedure` at level `alpha` with default schedules.
#[no_mangle]
pub extern "C" fn score_procedure_config_default(procedure: ScoreProcedureId, alpha: f64) -> ScoreProcedureConfig {
    ScoreProcedureConfig {
        procedure,
        alpha,
        gamma: DEFAULT_SCHEDULE,
        omega: DEFAULT_SCHEDULE,
        lambda: DEFAULT_SCHEDULE,
    }
}

/// Static, NUL-terminated name such as `"score-plus-lord"`.
#[no_mangle]
pub extern "C" fn score_procedure_name(procedure: ScoreProcedureId) -> *const c_char {
    const NAMES: [&[u8]; 11] = [
        b"e-lond\0",
        b"score-lond\0",
        b"e-lord\0",
        b"score-lord\0",
        b"score-plus-lord\0",
        b"e-saffron\0",
        b"score-saffron\0",
        b"score-plus-saffron\0",
        b"p-lond\0",
        b"p-lord\0",
        b"p-saffron\0",
    ];
    NAMES[procedure as usize].as_ptr().cast()
}

/// 1 when the procedure consumes p-values, 0 for e-values.
#[no_mangle]
pub extern "C" fn score_procedure_takes_pvalues(procedure: ScoreProcedureId) -> u8 {
    u8::from(ProcedureKind::from(procedure).evidence_kind() == EvidenceKind::PValue)
}

/// Creates a procedure. On success `*out` owns a handle to release with
/// [`score_procedure_free`].
///
/// # Safety
/// `config` must point to a valid config and `out` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn score_procedure_new(
    config: *const ScoreProcedureConfig,
    out: *mut *mut ScoreProcedure,
) -> ScoreStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        *out = ptr::null_mut();
        let Some(c) = config.as_ref() else {
            return null("config");
        };
        match to_config(c).and_then(Procedure::new) {
            Ok(p) => {
                *out = Box::into_raw(Box::new(ScoreProcedure { inner: p }));
                ScoreStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `handle` must come from [`score_procedure_new`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn score_procedure_free(handle: *mut ScoreProcedure) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// The level the next step will test at.
///
/// # Safety
/// `handle` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn score_procedure_next_alpha(handle: *const ScoreProcedure, out: *mut f64) -> ScoreStatus {
    guard(|| {
        let Some(h) = handle.as_ref() else {
            return null("handle");
        };
        if out.is_null() {
            return null("out");
        }
        match h.inner.next_alpha() {
            Ok(a) => {
                *out = a;
                ScoreStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Feeds one observation with an explicit, strictly increasing index.
/// `value` is an e-value or a p-value according to the procedure. `out` may
/// be null. On error the state is unchanged.
///
/// # Safety
/// `handle` must be live; `out` null or writable.
#[no_mangle]
pub unsafe extern "C" fn score_procedure_step(
    handle: *mut ScoreProcedure,
    index: u64,
    value: f64,
    out: *mut ScoreStepResult,
) -> ScoreStatus {
    guard(|| {
        let Some(h) = handle.as_mut() else {
            return null("handle");
        };
        let obs = match h.inner.config().kind.evidence_kind() {
            EvidenceKind::EValue => Observation::e_value(index, value),
            EvidenceKind::PValue => Observation::p_value(index, value),
        };
        match obs.and_then(|o| h.inner.step(&o)) {
            Ok(r) => {
                if let Some(out) = out.as_mut() {
                    *out = ScoreStepResult {
                        index: r.ledger.index,
                        alpha_t: r.ledger.alpha_t,
                        decision: u8::from(r.ledger.decision),
                        overshoot: r.ledger.overshoot,
                        cost: r.ledger.cost,
                        rejections: r.rejections,
                        fdp_hat: r.fdp_hat,
                        wealth: r.wealth,
                    };
                }
                ScoreStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Rejections so far; 0 for a null handle.
///
/// # Safety
/// `handle` must be live or null.
#[no_mangle]
pub unsafe extern "C" fn score_procedure_rejections(handle: *const ScoreProcedure) -> u64 {
    handle.as_ref().map_or(0, |h| h.inner.state().rejections)
}

/// Steps taken so far; 0 for a null handle.
///
/// # Safety
/// `handle` must be live or null.
#[no_mangle]
pub unsafe extern "C" fn score_procedure_steps(handle: *const ScoreProcedure) -> u64 {
    handle.as_ref().map_or(0, |h| h.inner.state().t)
}

/// Remaining wealth `alpha - fdp_hat`; NaN for a null handle.
///
/// # Safety
/// `handle` must be live or null.
#[no_mangle]
pub unsafe extern "C" fn score_procedure_wealth(handle: *const ScoreProcedure) -> f64 {
    handle.as_ref().map_or(f64::NAN, |h| h.inner.state().wealth)
}

/// Vovk-Wang calibrator `e = (1 - p + p ln p) / (p (ln p)^2)`, p in (0, 1].
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn score_vovk_p_to_e(p: f64, out: *mut f64) -> ScoreStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        match vovk_p_to_e(p) {
            Ok(e) => {
                *out = e;
                ScoreStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Conformal e-value of `test_score` against `n` calibration scores.
///
/// # Safety
/// `scores` must point to `n` readable doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn score_conformal_evalue(
    test_score: f64,
    scores: *const f64,
    n: usize,
    out: *mut f64,
) -> ScoreStatus {
    guard(|| {
        if out.is_null() {
            return null("out");
        }
        if scores.is_null() {
            return null("scores");
        }
        let cal = std::slice::from_raw_parts(scores, n).to_vec();
        match CalibrationSet::new(cal).and_then(|c| conformal_evalue(test_score, &c)) {
            Ok(e) => {
                *out = e;
                ScoreStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Message of the last failure on this thread; empty when none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn score_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_line_up_with_kinds() {
        let ids = [
            ScoreProcedureId::ELond,
            ScoreProcedureId::ScoreLond,
            ScoreProcedureId::ELord,
            ScoreProcedureId::ScoreLord,
            ScoreProcedureId::ScorePlusLord,
            ScoreProcedureId::ESaffron,
            ScoreProcedureId::ScoreSaffron,
            ScoreProcedureId::ScorePlusSaffron,
            ScoreProcedureId::PLond,
            ScoreProcedureId::PLord,
            ScoreProcedureId::PSaffron,
        ];
        for id in ids {
            let kind = ProcedureKind::from(id);
            let name = unsafe { std::ffi::CStr::from_ptr(score_procedure_name(id)) };
            assert_eq!(name.to_str().unwrap(), kind.name());
        }
    }
}
