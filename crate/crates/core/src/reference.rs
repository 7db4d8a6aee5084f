//! Brute-force oracles for cross-checking the incremental procedures.
//!
//! `naive_trajectory` recomputes every step from the full history, summing
//! the displayed recurrences term by term. It shares only the refund
//! primitives and schedules with the `procedures` module.

use rand::Rng;

use crate::error::{Error, Result};
use crate::normal;
use crate::procedures::{run_stream, Denominator, ProcedureConfig, ProcedureKind};
use crate::refund::{overshoot_unchecked, refund_adjusted_cost};
use crate::types::{clamp_e, EvidenceKind, Observation};

/// Per-step quantities recomputed from scratch.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OracleTrace {
    pub alpha: Vec<f64>,
    pub decision: Vec<bool>,
    pub overshoot: Vec<f64>,
    pub cost: Vec<f64>,
    /// `alpha - fdp_hat` after each step.
    pub wealth: Vec<f64>,
    pub fdp_hat: Vec<f64>,
    /// `R_t` after each step.
    pub rejections: Vec<u64>,
}

impl OracleTrace {
    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }
}

/// Number of rejections among the first `n` decisions.
fn count(decisions: &[bool], n: usize) -> u64 {
    decisions[..n].iter().filter(|&&d| d).count() as u64
}

/// `sum_{j < n} x_j / (R_{j-1} + 1)`.
#[allow(clippy::needless_range_loop)]
fn local_sum(xs: &[f64], decisions: &[bool], n: usize) -> f64 {
    let mut s = 0.0;
    for j in 0..n {
        s += xs[j] / (count(decisions, j) as f64 + 1.0);
    }
    s
}

fn global_sum(xs: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for x in &xs[..n] {
        s += x;
    }
    s
}

pub fn naive_trajectory(config: &ProcedureConfig, evidence: &[f64]) -> Result<OracleTrace> {
    use ProcedureKind::*;

    config.validate()?;
    let kind = config.kind;
    let alpha = config.alpha;
    let is_e = kind.evidence_kind() == EvidenceKind::EValue;
    let mut tr = OracleTrace::default();

    for (i, &raw) in evidence.iter().enumerate() {
        let t = i as u64 + 1;
        if raw.is_nan() {
            return Err(Error::NonFiniteEvidence { index: t, value: raw });
        }
        if raw < 0.0 || (!is_e && raw > 1.0) {
            return Err(Error::invalid("evidence", raw, "out of range for the procedure"));
        }
        let x = clamp_e(raw);
        let r_prev = count(&tr.decision, i);

        let gamma = || config.gamma.expect("validated").value(t, r_prev);
        let omega = || config.omega.expect("validated").value(t, r_prev);
        let lambda = || config.lambda.expect("validated").value(t, r_prev);

        let alpha_t = match kind {
            ELond | PLond => alpha * gamma()? * (r_prev as f64 + 1.0),
            ScoreLond => {
                let refunds: Vec<f64> = tr
                    .overshoot
                    .iter()
                    .zip(&tr.alpha)
                    .map(|(&o, &a)| o.min(a))
                    .collect();
                gamma()? * (r_prev as f64 + 1.0) * (alpha + local_sum(&refunds, &tr.decision, i))
            }
            ELord | ScoreLord => {
                omega()? * (r_prev as f64 + 1.0) * (alpha - local_sum(&tr.cost, &tr.decision, i))
            }
            ESaffron | ScoreSaffron => {
                let l = lambda()?;
                omega()? * (1.0 - l) * (r_prev as f64 + 1.0) * (alpha - local_sum(&tr.cost, &tr.decision, i))
            }
            ScorePlusLord | PLord => {
                let d = r_prev.max(1) as f64;
                omega()? * d * (alpha - global_sum(&tr.cost, i) / d)
            }
            ScorePlusSaffron | PSaffron => {
                let d = r_prev.max(1) as f64;
                omega()? * (1.0 - lambda()?) * d * (alpha - global_sum(&tr.cost, i) / d)
            }
        }
        .max(0.0);

        let decision = if is_e { x >= 1.0 / alpha_t } else { x <= alpha_t };
        let o = if is_e { overshoot_unchecked(alpha_t, x) } else { 0.0 };
        let cost = match kind {
            ELond | ELord | PLond | PLord => alpha_t,
            ScoreLond | ScoreLord | ScorePlusLord => refund_adjusted_cost(alpha_t, o),
            ESaffron => {
                let l = lambda()?;
                if x < 1.0 / l {
                    alpha_t * 1.0 / (1.0 - l)
                } else {
                    0.0
                }
            }
            ScoreSaffron | ScorePlusSaffron => {
                let l = lambda()?;
                refund_adjusted_cost(alpha_t * (1.0 - l * x) / (1.0 - l), o)
            }
            PSaffron => {
                let l = lambda()?;
                if x > l {
                    alpha_t * 1.0 / (1.0 - l)
                } else {
                    0.0
                }
            }
        };

        tr.alpha.push(alpha_t);
        tr.decision.push(decision);
        tr.overshoot.push(o);
        tr.cost.push(cost);
        let n = i + 1;
        let r_now = count(&tr.decision, n);
        let fdp = match kind.denominator() {
            Denominator::Local => local_sum(&tr.cost, &tr.decision, n),
            Denominator::Global => global_sum(&tr.cost, n) / r_now.max(1) as f64,
        };
        tr.fdp_hat.push(fdp);
        tr.wealth.push(alpha - fdp);
        tr.rejections.push(r_now);
    }
    Ok(tr)
}

/// Largest absolute per-field difference between the incremental run and
/// the oracle on one stream.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Divergence {
    pub alpha: f64,
    pub overshoot: f64,
    pub cost: f64,
    pub wealth: f64,
    pub fdp_hat: f64,
    /// Steps where the decisions or rejection counts differ.
    pub decision_mismatches: usize,
}

impl Divergence {
    pub fn max_abs(&self) -> f64 {
        self.alpha.max(self.overshoot).max(self.cost).max(self.wealth).max(self.fdp_hat)
    }

    pub fn merge(self, other: Divergence) -> Divergence {
        Divergence {
            alpha: self.alpha.max(other.alpha),
            overshoot: self.overshoot.max(other.overshoot),
            cost: self.cost.max(other.cost),
            wealth: self.wealth.max(other.wealth),
            fdp_hat: self.fdp_hat.max(other.fdp_hat),
            decision_mismatches: self.decision_mismatches + other.decision_mismatches,
        }
    }

    pub fn within(&self, tol: f64) -> bool {
        self.decision_mismatches == 0 && self.max_abs() <= tol
    }
}

/// Runs `evidence` through the incremental procedure and the oracle.
pub fn compare(config: &ProcedureConfig, evidence: &[f64]) -> Result<Divergence> {
    let stream = evidence
        .iter()
        .enumerate()
        .map(|(i, &x)| match config.kind.evidence_kind() {
            EvidenceKind::EValue => Observation::e_value(i as u64 + 1, x),
            EvidenceKind::PValue => Observation::p_value(i as u64 + 1, x),
        })
        .collect::<Result<Vec<_>>>()?;
    let inc = run_stream(config, &stream)?;
    let naive = naive_trajectory(config, evidence)?;
    if naive.len() != inc.steps.len() {
        return Err(Error::LengthMismatch {
            left: inc.steps.len(),
            right: naive.len(),
        });
    }
    let mut d = Divergence::default();
    for (k, s) in inc.steps.iter().enumerate() {
        d.alpha = d.alpha.max((s.ledger.alpha_t - naive.alpha[k]).abs());
        d.overshoot = d.overshoot.max((s.ledger.overshoot - naive.overshoot[k]).abs());
        d.cost = d.cost.max((s.ledger.cost - naive.cost[k]).abs());
        d.wealth = d.wealth.max((s.wealth - naive.wealth[k]).abs());
        d.fdp_hat = d.fdp_hat.max((s.fdp_hat - naive.fdp_hat[k]).abs());
        if s.ledger.decision != naive.decision[k] || s.rejections != naive.rejections[k] {
            d.decision_mismatches += 1;
        }
    }
    Ok(d)
}

/// Test evidence mixing nulls, zeros, near-threshold and very large values.
///
/// e-values: 10% zeros, 50% `U(0, 2)`, 25% `exp(N(0, 2^2))`, 15% `10^U(1, 4)`.
/// p-values: 10% `10^-U(2, 8)`, 20% `U^4`, 65% `U(0, 1)`, 5% exactly one.
pub fn random_evidence<R: Rng>(kind: EvidenceKind, len: usize, rng: &mut R) -> Vec<f64> {
    (0..len)
        .map(|_| {
            let u: f64 = rng.gen();
            match kind {
                EvidenceKind::EValue => {
                    if u < 0.10 {
                        0.0
                    } else if u < 0.60 {
                        rng.gen_range(0.0..2.0)
                    } else if u < 0.85 {
                        (2.0 * normal::quantile(rng.gen_range(1e-12..1.0))).exp()
                    } else {
                        10f64.powf(rng.gen_range(1.0..4.0))
                    }
                }
                EvidenceKind::PValue => {
                    if u < 0.10 {
                        10f64.powf(-rng.gen_range(2.0..8.0))
                    } else if u < 0.30 {
                        rng.gen::<f64>().powi(4)
                    } else if u < 0.95 {
                        rng.gen()
                    } else {
                        1.0
                    }
                }
            }
        })
        .collect()
}

/// Outcome of checking `1{y >= 1} <= y - (y - 1)_+` on a grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundScanReport {
    pub points: usize,
    pub violations: usize,
    pub min_slack: f64,
    /// Largest slack among grid points with `y >= 1`; zero means equality.
    pub max_slack_above_one: f64,
}

/// `y - (y - 1)_+ - 1{y >= 1}`.
pub fn bound_slack(y: f64) -> f64 {
    let indicator = if y >= 1.0 { 1.0 } else { 0.0 };
    y - (y - 1.0).max(0.0) - indicator
}

/// Scans `y = k * grid_step` for `k = 0, 1, ...` while `y <= y_max`.
pub fn bound_scan(grid_step: f64, y_max: f64) -> Result<BoundScanReport> {
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(Error::invalid("grid step", grid_step, "must be positive"));
    }
    if !(y_max >= 0.0 && y_max.is_finite()) {
        return Err(Error::invalid("y_max", y_max, "must be non-negative"));
    }
    // integer steps avoid drift from repeated addition
    let n = (y_max / grid_step + 1e-9).floor() as usize;
    let mut report = BoundScanReport {
        points: 0,
        violations: 0,
        min_slack: f64::INFINITY,
        max_slack_above_one: 0.0,
    };
    for k in 0..=n {
        let y = k as f64 * grid_step;
        let s = bound_slack(y);
        report.points += 1;
        if s < 0.0 {
            report.violations += 1;
        }
        report.min_slack = report.min_slack.min(s);
        if y >= 1.0 {
            report.max_slack_above_one = report.max_slack_above_one.max(s.abs());
        }
    }
    Ok(report)
}
