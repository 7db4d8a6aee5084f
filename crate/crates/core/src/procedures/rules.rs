use crate::error::{check_unit_open, Error, Result};
use crate::procedures::{Denominator, ProcedureConfig, ProcedureKind};
use crate::refund::{overshoot_unchecked, refund_adjusted_cost};
use crate::schedule::Schedule;
use crate::types::{EvidenceKind, Observation, ProcedureState, StepLedger};

/// Wealth below this is treated as an implementation bug rather than rounding.
const WEALTH_FLOOR: f64 = -1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SaffronVariant {
    Baseline,
    Score,
}

/// Candidate-screening cost of a SAFFRON-type step.
///
/// The baseline charges `alpha_t / (1 - lambda_t)` whenever `e_t < 1/lambda_t`.
/// The refined variant replaces the indicator by `1 - lambda_t e_t` and
/// refunds the overshoot, `(alpha_t (1 - lambda_t e_t) / (1 - lambda_t) - O_t)_+`,
/// which is never larger.
pub fn saffron_cost(alpha_t: f64, lambda_t: f64, e_t: f64, variant: SaffronVariant) -> Result<f64> {
    check_unit_open("lambda", lambda_t)?;
    Ok(saffron_cost_unchecked(alpha_t, lambda_t, e_t, variant))
}

#[inline]
fn saffron_cost_unchecked(alpha_t: f64, lambda_t: f64, e_t: f64, variant: SaffronVariant) -> f64 {
    match variant {
        SaffronVariant::Baseline => {
            let screened = if e_t < 1.0 / lambda_t { 1.0 } else { 0.0 };
            alpha_t * screened / (1.0 - lambda_t)
        }
        SaffronVariant::Score => {
            let o = overshoot_unchecked(alpha_t, e_t);
            (alpha_t * (1.0 - lambda_t * e_t) / (1.0 - lambda_t) - o).max(0.0)
        }
    }
}

/// Outcome of one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepResult {
    pub ledger: StepLedger,
    /// The procedure's own FDP estimate after this step.
    pub fdp_hat: f64,
    /// Remaining budget `alpha - fdp_hat` entering the next step.
    pub wealth: f64,
    /// `R_t`, rejections including this step.
    pub rejections: u64,
}

fn schedule_value(s: Option<Schedule>, name: &'static str, t: u64, r: u64) -> Result<f64> {
    s.ok_or_else(|| Error::invalid(name, "none", "schedule missing"))?
        .value(t, r)
}

/// Significance level for the next step, `t = state.t + 1`.
pub fn next_alpha(state: &ProcedureState, config: &ProcedureConfig) -> Result<f64> {
    use ProcedureKind::*;

    let t = state.t + 1;
    let r = state.rejections;
    let alpha = config.alpha;
    let sums = &state.sums;

    if state.wealth < WEALTH_FLOOR {
        return Err(Error::WealthUnderflow {
            step: t,
            wealth: state.wealth,
        });
    }

    let local = (r + 1) as f64;
    let global = r.max(1) as f64;
    let value = match config.kind {
        ELond | PLond => {
            let gamma = schedule_value(config.gamma, "gamma", t, r)?;
            gamma * local * alpha
        }
        ScoreLond => {
            let gamma = schedule_value(config.gamma, "gamma", t, r)?;
            gamma * local * (alpha + sums.refund)
        }
        ELord | ScoreLord => {
            let omega = schedule_value(config.omega, "omega", t, r)?;
            omega * local * (alpha - sums.local_cost)
        }
        ESaffron | ScoreSaffron => {
            let omega = schedule_value(config.omega, "omega", t, r)?;
            let lambda = schedule_value(config.lambda, "lambda", t, r)?;
            omega * (1.0 - lambda) * local * (alpha - sums.local_cost)
        }
        ScorePlusLord | PLord => {
            let omega = schedule_value(config.omega, "omega", t, r)?;
            omega * global * (alpha - sums.total_cost / global)
        }
        ScorePlusSaffron | PSaffron => {
            let omega = schedule_value(config.omega, "omega", t, r)?;
            let lambda = schedule_value(config.lambda, "lambda", t, r)?;
            omega * (1.0 - lambda) * global * (alpha - sums.total_cost / global)
        }
    };
    // rounding can leave wealth a hair below zero; never let it flip the rule
    Ok(value.max(0.0))
}

fn check_observation(state: &ProcedureState, kind: ProcedureKind, obs: &Observation) -> Result<()> {
    if obs.kind != kind.evidence_kind() {
        return Err(Error::EvidenceKindMismatch {
            procedure: kind.name(),
            expected: kind.evidence_kind(),
            found: obs.kind,
        });
    }
    let v = obs.evidence;
    if v.is_nan() || v == f64::NEG_INFINITY || (obs.kind == EvidenceKind::PValue && v.is_infinite()) {
        return Err(Error::NonFiniteEvidence {
            index: obs.index,
            value: v,
        });
    }
    match obs.kind {
        EvidenceKind::EValue if v < 0.0 => {
            return Err(Error::invalid("e-value", v, "must be non-negative"))
        }
        EvidenceKind::PValue if !(0.0..=1.0).contains(&v) => {
            return Err(Error::invalid("p-value", v, "must lie in [0, 1]"))
        }
        _ => {}
    }
    if let Some(prev) = state.last_index {
        if obs.index <= prev {
            return Err(Error::IndexOrder {
                index: obs.index,
                previous: prev,
            });
        }
    }
    Ok(())
}

/// Advances `state` by one observation in place.
pub(crate) fn step_in_place(
    state: &mut ProcedureState,
    config: &ProcedureConfig,
    obs: &Observation,
) -> Result<StepResult> {
    use ProcedureKind::*;

    let kind = config.kind;
    check_observation(state, kind, obs)?;

    let t = state.t + 1;
    let r_before = state.rejections;
    let alpha_t = next_alpha(state, config)?;
    if alpha_t >= 1.0 {
        if state.alpha_above_one == 0 {
            log::warn!("{kind}: alpha_t = {alpha_t} >= 1 at step {t}; threshold 1/alpha_t <= 1");
        }
        state.alpha_above_one += 1;
    }

    let x = crate::types::clamp_e(obs.evidence);
    let (decision, overshoot) = match obs.kind {
        EvidenceKind::EValue => (x >= 1.0 / alpha_t, overshoot_unchecked(alpha_t, x)),
        EvidenceKind::PValue => (x <= alpha_t, 0.0),
    };

    let lambda = || schedule_value(config.lambda, "lambda", t, r_before);
    let cost = match kind {
        ELond | ELord | PLond | PLord => alpha_t,
        ScoreLond | ScoreLord | ScorePlusLord => refund_adjusted_cost(alpha_t, overshoot),
        ESaffron => saffron_cost_unchecked(alpha_t, lambda()?, x, SaffronVariant::Baseline),
        ScoreSaffron | ScorePlusSaffron => {
            saffron_cost_unchecked(alpha_t, lambda()?, x, SaffronVariant::Score)
        }
        PSaffron => {
            let l = lambda()?;
            let screened = if x > l { 1.0 } else { 0.0 };
            alpha_t * screened / (1.0 - l)
        }
    };

    let local = (r_before + 1) as f64;
    state.sums.local_cost += cost / local;
    state.sums.total_cost += cost;
    if kind == ScoreLond {
        state.sums.refund += overshoot.min(alpha_t) / local;
    }
    if decision {
        state.rejections += 1;
    }

    let fdp_hat = match kind.denominator() {
        Denominator::Local => state.sums.local_cost,
        Denominator::Global => state.sums.total_cost / state.rejections.max(1) as f64,
    };
    let ledger = StepLedger {
        index: obs.index,
        alpha_t,
        decision,
        overshoot,
        cost,
        rejections_before: r_before,
    };
    state.t = t;
    state.cumulative_fdp_hat = fdp_hat;
    state.wealth = config.alpha - fdp_hat;
    state.last_index = Some(obs.index);
    state.ledger.push(ledger);

    Ok(StepResult {
        ledger,
        fdp_hat,
        wealth: state.wealth,
        rejections: state.rejections,
    })
}

/// Pure transition: consumes the state and returns the successor.
pub fn step(
    mut state: ProcedureState,
    config: &ProcedureConfig,
    obs: &Observation,
) -> Result<(StepResult, ProcedureState)> {
    let res = step_in_place(&mut state, config, obs)?;
    Ok((res, state))
}

/// A configured procedure together with its running state.
#[derive(Debug, Clone)]
pub struct Procedure {
    config: ProcedureConfig,
    state: ProcedureState,
}

impl Procedure {
    pub fn new(config: ProcedureConfig) -> Result<Self> {
        config.validate()?;
        Ok(Procedure {
            state: ProcedureState::new(config.alpha),
            config,
        })
    }

    pub fn config(&self) -> &ProcedureConfig {
        &self.config
    }

    pub fn state(&self) -> &ProcedureState {
        &self.state
    }

    pub fn into_state(self) -> ProcedureState {
        self.state
    }

    pub fn next_alpha(&self) -> Result<f64> {
        next_alpha(&self.state, &self.config)
    }

    pub fn step(&mut self, obs: &Observation) -> Result<StepResult> {
        step_in_place(&mut self.state, &self.config, obs)
    }

    /// Steps with a raw statistic, numbering observations consecutively.
    pub fn step_value(&mut self, value: f64) -> Result<StepResult> {
        let index = self.state.last_index.map_or(1, |i| i + 1);
        let obs = match self.config.kind.evidence_kind() {
            EvidenceKind::EValue => Observation::e_value(index, value)?,
            EvidenceKind::PValue => Observation::p_value(index, value)?,
        };
        self.step(&obs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ProcedureKind::*;

    fn proc(kind: ProcedureKind) -> Procedure {
        Procedure::new(ProcedureConfig::new(kind, 0.05).unwrap()).unwrap()
    }

    #[test]
    fn score_lond_seed_and_second_step() {
        let mut p = proc(ScoreLond);
        assert!((p.next_alpha().unwrap() - 0.025).abs() < 1e-15);
        let s = p.step_value(100.0).unwrap();
        assert!(s.ledger.decision);
        assert!((s.ledger.overshoot - 1.5).abs() < 1e-12);
        assert_eq!(s.rejections, 1);
        assert!((p.next_alpha().unwrap() - 0.0375).abs() < 1e-15);
    }

    #[test]
    fn e_lond_second_step() {
        let mut p = proc(ELond);
        p.step_value(100.0).unwrap();
        assert!((p.next_alpha().unwrap() - 0.025).abs() < 1e-15);
    }

    #[test]
    fn score_lord_first_step() {
        let mut p = proc(ScoreLord);
        let s = p.step_value(1000.0).unwrap();
        assert!((s.ledger.alpha_t - 0.0025).abs() < 1e-15);
        assert!(s.ledger.decision);
        assert!((s.ledger.overshoot - 1.5).abs() < 1e-12);
        assert_eq!(s.ledger.cost, 0.0);
        assert!((s.wealth - 0.05).abs() < 1e-15);
        assert!((p.next_alpha().unwrap() - 0.005).abs() < 1e-15);
    }

    #[test]
    fn e_lord_first_step() {
        let mut p = proc(ELord);
        let s = p.step_value(1000.0).unwrap();
        assert!(s.ledger.decision);
        assert!((s.ledger.cost - 0.0025).abs() < 1e-15);
        assert!((p.next_alpha().unwrap() - 0.00475).abs() < 1e-15);
    }

    #[test]
    fn zero_evidence_never_rejects() {
        for kind in ProcedureKind::ALL {
            if kind.evidence_kind() != EvidenceKind::EValue {
                continue;
            }
            let s = proc(kind).step_value(0.0).unwrap();
            assert!(!s.ledger.decision, "{kind}");
            assert_eq!(s.ledger.overshoot, 0.0);
        }
    }

    #[test]
    fn seed_values() {
        let seeds = [
            (ELond, 0.025),
            (ScoreLond, 0.025),
            (ELord, 0.0025),
            (ScorePlusLord, 0.0025),
            (ESaffron, 0.00125),
            (ScorePlusSaffron, 0.00125),
            (PLord, 0.0025),
            (PSaffron, 0.00125),
        ];
        for (kind, want) in seeds {
            assert!((proc(kind).next_alpha().unwrap() - want).abs() < 1e-15, "{kind}");
        }
    }

    #[test]
    fn saffron_cost_examples() {
        let c = saffron_cost(0.01, 0.5, 0.4, SaffronVariant::Score).unwrap();
        assert!((c - 0.016).abs() < 1e-15);
        assert_eq!(saffron_cost(0.01, 0.5, 2.0, SaffronVariant::Score).unwrap(), 0.0);
        let b = saffron_cost(0.01, 0.5, 0.4, SaffronVariant::Baseline).unwrap();
        assert!((b - 0.02).abs() < 1e-15);
        assert!(saffron_cost(0.01, 1.0, 0.4, SaffronVariant::Score).is_err());
        assert!(saffron_cost(0.01, 0.0, 0.4, SaffronVariant::Baseline).is_err());
    }

    #[test]
    fn evidence_kind_mismatch() {
        let mut p = proc(ScoreLord);
        let obs = Observation::p_value(1, 0.01).unwrap();
        assert!(matches!(p.step(&obs), Err(Error::EvidenceKindMismatch { .. })));
        let mut q = proc(PLord);
        let obs = Observation::e_value(1, 3.0).unwrap();
        assert!(matches!(q.step(&obs), Err(Error::EvidenceKindMismatch { .. })));
    }

    #[test]
    fn non_finite_evidence() {
        let mut p = proc(ScoreLord);
        let obs = Observation {
            index: 1,
            kind: EvidenceKind::EValue,
            evidence: f64::NAN,
            truth: None,
        };
        assert!(matches!(p.step(&obs), Err(Error::NonFiniteEvidence { .. })));
        assert!(Observation::e_value(1, f64::NAN).is_err());
        assert!(Observation::p_value(1, f64::INFINITY).is_err());
    }

    #[test]
    fn infinite_e_value_is_clamped() {
        let mut p = proc(ScoreLord);
        let s = p.step_value(f64::INFINITY).unwrap();
        assert!(s.ledger.decision);
        assert!(s.ledger.overshoot.is_finite());
        assert_eq!(s.ledger.cost, 0.0);
    }

    #[test]
    fn index_must_increase() {
        let mut p = proc(ELord);
        p.step(&Observation::e_value(5, 1.0).unwrap()).unwrap();
        let err = p.step(&Observation::e_value(5, 1.0).unwrap()).unwrap_err();
        assert!(matches!(err, Error::IndexOrder { index: 5, previous: 5 }));
    }

    #[test]
    fn threshold_tie_rejects() {
        // e exactly at 1/alpha_1 = 400 for SCORE-LORD
        let mut p = proc(ScoreLord);
        assert!(p.step_value(400.0).unwrap().ledger.decision);
        // p exactly at alpha_1 = 0.0025 for p-LORD
        let mut q = proc(PLord);
        assert!(q.step_value(0.0025).unwrap().ledger.decision);
    }

    #[test]
    fn functional_step_matches_procedure() {
        let cfg = ProcedureConfig::new(ScoreSaffron, 0.05).unwrap();
        let mut p = Procedure::new(cfg).unwrap();
        let mut state = ProcedureState::new(0.05);
        for (i, e) in [0.3, 50.0, 1200.0, 0.0, 4.0].into_iter().enumerate() {
            let obs = Observation::e_value(i as u64 + 1, e).unwrap();
            let a = p.step(&obs).unwrap();
            let (b, next) = step(state, &cfg, &obs).unwrap();
            state = next;
            assert_eq!(a, b);
        }
        assert_eq!(p.state(), &state);
    }

    #[test]
    fn underflow_is_reported() {
        let cfg = ProcedureConfig::new(ELord, 0.05).unwrap();
        let mut state = ProcedureState::new(0.05);
        state.wealth = -1e-9;
        assert!(matches!(next_alpha(&state, &cfg), Err(Error::WealthUnderflow { .. })));
    }

    #[test]
    fn p_saffron_charges_only_above_lambda() {
        let mut p = proc(PSaffron);
        let s = p.step_value(0.3).unwrap();
        assert_eq!(s.ledger.cost, 0.0);
        let s = p.step_value(0.9).unwrap();
        assert!(s.ledger.cost > 0.0);
    }
}
