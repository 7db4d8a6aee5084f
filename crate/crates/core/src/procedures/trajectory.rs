use crate::error::Result;
use crate::procedures::{Procedure, ProcedureConfig, ProcedureKind};
use crate::types::{Observation, StepLedger};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryStep {
    pub ledger: StepLedger,
    /// `R_t` after this step.
    pub rejections: u64,
    pub fdp_hat: f64,
    pub wealth: f64,
    pub truth: Option<bool>,
}

/// Every step of one procedure run over a stream.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub procedure: ProcedureKind,
    pub alpha: f64,
    pub steps: Vec<TrajectoryStep>,
}

impl Trajectory {
    pub fn decisions(&self) -> impl Iterator<Item = bool> + '_ {
        self.steps.iter().map(|s| s.ledger.decision)
    }

    pub fn rejections(&self) -> u64 {
        self.steps.last().map_or(0, |s| s.rejections)
    }

    pub fn max_fdp_hat(&self) -> f64 {
        self.steps.iter().map(|s| s.fdp_hat).fold(0.0, f64::max)
    }
}

pub fn run_stream(config: &ProcedureConfig, stream: &[Observation]) -> Result<Trajectory> {
    let mut p = Procedure::new(*config)?;
    let mut steps = Vec::with_capacity(stream.len());
    for obs in stream {
        let r = p.step(obs)?;
        steps.push(TrajectoryStep {
            ledger: r.ledger,
            rejections: r.rejections,
            fdp_hat: r.fdp_hat,
            wealth: r.wealth,
            truth: obs.truth,
        });
    }
    Ok(Trajectory {
        procedure: config.kind,
        alpha: config.alpha,
        steps,
    })
}
