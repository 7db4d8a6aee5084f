//! False discovery proportion and average power along a trajectory.

use crate::error::{Error, Result};
use crate::procedures::Trajectory;

#[derive(Debug, Clone, PartialEq)]
pub struct Curves {
    /// `fdp[t-1]`: false rejections over `R_t v 1`.
    pub fdp: Vec<f64>,
    /// `power[t-1]`: true rejections over non-nulls seen so far; 0 before
    /// the first non-null.
    pub power: Vec<f64>,
}

pub fn evaluate(trajectory: &Trajectory) -> Result<Curves> {
    let n = trajectory.steps.len();
    let mut fdp = Vec::with_capacity(n);
    let mut power = Vec::with_capacity(n);
    let (mut false_rej, mut true_rej, mut rej, mut alts) = (0u64, 0u64, 0u64, 0u64);
    for s in &trajectory.steps {
        let theta = s.truth.ok_or(Error::MissingTruth(s.ledger.index))?;
        if theta {
            alts += 1;
        }
        if s.ledger.decision {
            rej += 1;
            if theta {
                true_rej += 1;
            } else {
                false_rej += 1;
            }
        }
        fdp.push(false_rej as f64 / rej.max(1) as f64);
        power.push(if alts == 0 { 0.0 } else { true_rej as f64 / alts as f64 });
    }
    Ok(Curves { fdp, power })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::procedures::{ProcedureKind, TrajectoryStep};
    use crate::types::StepLedger;

    fn traj(decisions: &[bool], truth: &[bool]) -> Trajectory {
        let mut r = 0;
        let steps = decisions
            .iter()
            .zip(truth)
            .enumerate()
            .map(|(i, (&d, &th))| {
                let before = r;
                r += u64::from(d);
                TrajectoryStep {
                    ledger: StepLedger {
                        index: i as u64 + 1,
                        alpha_t: 0.01,
                        decision: d,
                        overshoot: 0.0,
                        cost: 0.01,
                        rejections_before: before,
                    },
                    rejections: r,
                    fdp_hat: 0.0,
                    wealth: 0.0,
                    truth: Some(th),
                }
            })
            .collect();
        Trajectory {
            procedure: ProcedureKind::ELord,
            alpha: 0.05,
            steps,
        }
    }

    #[test]
    fn worked_example() {
        let c = evaluate(&traj(&[true, false, true], &[false, false, true])).unwrap();
        assert_eq!(c.fdp[2], 0.5);
        assert_eq!(c.power[2], 1.0);
        assert_eq!(c.fdp[0], 1.0);
        assert_eq!(c.power[0], 0.0);
    }

    #[test]
    fn no_rejections() {
        let c = evaluate(&traj(&[false; 4], &[false, true, false, true])).unwrap();
        assert!(c.fdp.iter().all(|&v| v == 0.0));
        assert!(c.power.iter().all(|&v| v == 0.0));
        let c = evaluate(&traj(&[false; 3], &[false; 3])).unwrap();
        assert!(c.power.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn missing_truth() {
        let mut t = traj(&[true], &[true]);
        t.steps[0].truth = None;
        assert!(matches!(evaluate(&t), Err(Error::MissingTruth(1))));
    }
}
