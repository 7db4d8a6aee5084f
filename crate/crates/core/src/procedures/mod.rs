//! The eleven online testing procedures behind one state-machine interface.
//!
//! | kind               | evidence | budget rule | cost `C_j`                                   | FDP denominator |
//! |--------------------|----------|-------------|----------------------------------------------|-----------------|
//! | e-LOND             | e        | gamma       | `alpha_j`                                    | `R_{j-1}+1`     |
//! | SCORE-LOND         | e        | gamma       | `(alpha_j - O_j)_+`                          | `R_{j-1}+1`     |
//! | e-LORD             | e        | omega       | `alpha_j`                                    | `R_{j-1}+1`     |
//! | SCORE-LORD         | e        | omega       | `(alpha_j - O_j)_+`                          | `R_{j-1}+1`     |
//! | SCORE+-LORD        | e        | omega       | `(alpha_j - O_j)_+`                          | `R_t v 1`       |
//! | e-SAFFRON          | e        | omega, lambda | `alpha_j 1{e_j < 1/lambda_j} / (1-lambda_j)` | `R_{j-1}+1`   |
//! | SCORE-SAFFRON      | e        | omega, lambda | `(alpha_j (1-lambda_j e_j)/(1-lambda_j) - O_j)_+` | `R_{j-1}+1` |
//! | SCORE+-SAFFRON     | e        | omega, lambda | as SCORE-SAFFRON                           | `R_t v 1`       |
//! | LOND               | p        | gamma       | `alpha_j`                                    | `R_{j-1}+1`     |
//! | LORD               | p        | omega       | `alpha_j`                                    | `R_t v 1`       |
//! | SAFFRON            | p        | omega, lambda | `alpha_j 1{p_j > lambda_j} / (1-lambda_j)` | `R_t v 1`       |
//!
//! Every update rule keeps the procedure's own FDP estimate at or below the
//! target level.

mod rules;
mod trajectory;

use std::fmt;
use std::str::FromStr;

pub use rules::{next_alpha, saffron_cost, step, Procedure, SaffronVariant, StepResult};
pub use trajectory::{run_stream, Trajectory, TrajectoryStep};

use crate::error::{check_unit_open, Error, Result};
use crate::schedule::Schedule;
use crate::types::EvidenceKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProcedureKind {
    ELond,
    ScoreLond,
    ELord,
    ScoreLord,
    ScorePlusLord,
    ESaffron,
    ScoreSaffron,
    ScorePlusSaffron,
    PLond,
    PLord,
    PSaffron,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Lond,
    Lord,
    Saffron,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Denominator {
    /// `R_{j-1} + 1`, fixed when step `j` is decided.
    Local,
    /// `R_t v 1`, refreshed by every new rejection.
    Global,
}

impl ProcedureKind {
    pub const ALL: [ProcedureKind; 11] = [
        ProcedureKind::ELond,
        ProcedureKind::ScoreLond,
        ProcedureKind::ELord,
        ProcedureKind::ScoreLord,
        ProcedureKind::ScorePlusLord,
        ProcedureKind::ESaffron,
        ProcedureKind::ScoreSaffron,
        ProcedureKind::ScorePlusSaffron,
        ProcedureKind::PLond,
        ProcedureKind::PLord,
        ProcedureKind::PSaffron,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProcedureKind::ELond => "e-lond",
            ProcedureKind::ScoreLond => "score-lond",
            ProcedureKind::ELord => "e-lord",
            ProcedureKind::ScoreLord => "score-lord",
            ProcedureKind::ScorePlusLord => "score-plus-lord",
            ProcedureKind::ESaffron => "e-saffron",
            ProcedureKind::ScoreSaffron => "score-saffron",
            ProcedureKind::ScorePlusSaffron => "score-plus-saffron",
            ProcedureKind::PLond => "p-lond",
            ProcedureKind::PLord => "p-lord",
            ProcedureKind::PSaffron => "p-saffron",
        }
    }

    pub fn evidence_kind(self) -> EvidenceKind {
        match self {
            ProcedureKind::PLond | ProcedureKind::PLord | ProcedureKind::PSaffron => {
                EvidenceKind::PValue
            }
            _ => EvidenceKind::EValue,
        }
    }

    pub fn family(self) -> Family {
        use ProcedureKind::*;
        match self {
            ELond | ScoreLond | PLond => Family::Lond,
            ELord | ScoreLord | ScorePlusLord | PLord => Family::Lord,
            ESaffron | ScoreSaffron | ScorePlusSaffron | PSaffron => Family::Saffron,
        }
    }

    pub fn denominator(self) -> Denominator {
        use ProcedureKind::*;
        match self {
            ScorePlusLord | ScorePlusSaffron | PLord | PSaffron => Denominator::Global,
            _ => Denominator::Local,
        }
    }

    /// The baseline a SCORE procedure refines, if any.
    pub fn baseline(self) -> Option<ProcedureKind> {
        use ProcedureKind::*;
        match self {
            ScoreLond => Some(ELond),
            ScoreLord => Some(ELord),
            ScoreSaffron => Some(ESaffron),
            _ => None,
        }
    }
}

impl fmt::Display for ProcedureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProcedureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        // accepts "score+-lord" and "score_plus_lord" alongside the canonical names
        let norm = s.trim().to_ascii_lowercase().replace(['_', ' '], "-").replace('+', "-plus");
        ProcedureKind::ALL
            .into_iter()
            .find(|k| k.name() == norm)
            .or(match norm.as_str() {
                "lond" => Some(ProcedureKind::PLond),
                "lord" => Some(ProcedureKind::PLord),
                "saffron" => Some(ProcedureKind::PSaffron),
                _ => None,
            })
            .ok_or_else(|| Error::invalid("procedure", s, "unknown procedure name"))
    }
}

/// Defaults used when a schedule is not given explicitly.
pub const DEFAULT_GAMMA: Schedule = Schedule::Geometric(0.5);
pub const DEFAULT_OMEGA: Schedule = Schedule::Constant(0.05);
pub const DEFAULT_LAMBDA: Schedule = Schedule::Constant(0.5);

/// Identity, target level and schedules of one procedure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcedureConfig {
    pub kind: ProcedureKind,
    pub alpha: f64,
    pub gamma: Option<Schedule>,
    pub omega: Option<Schedule>,
    pub lambda: Option<Schedule>,
}

impl ProcedureConfig {
    /// Config with the default schedules the procedure needs.
    pub fn new(kind: ProcedureKind, alpha: f64) -> Result<Self> {
        let (gamma, omega, lambda) = match kind.family() {
            Family::Lond => (Some(DEFAULT_GAMMA), None, None),
            Family::Lord => (None, Some(DEFAULT_OMEGA), None),
            Family::Saffron => (None, Some(DEFAULT_OMEGA), Some(DEFAULT_LAMBDA)),
        };
        let cfg = ProcedureConfig {
            kind,
            alpha,
            gamma,
            omega,
            lambda,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_gamma(mut self, gamma: Schedule) -> Result<Self> {
        self.gamma = Some(gamma);
        self.validate()?;
        Ok(self)
    }

    pub fn with_omega(mut self, omega: Schedule) -> Result<Self> {
        self.omega = Some(omega);
        self.validate()?;
        Ok(self)
    }

    pub fn with_lambda(mut self, lambda: Schedule) -> Result<Self> {
        self.lambda = Some(lambda);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        check_unit_open("alpha", self.alpha)?;
        let family = self.kind.family();
        match family {
            Family::Lond => match self.gamma {
                Some(g @ Schedule::Geometric(_)) => g.validate()?,
                Some(other) => {
                    return Err(Error::invalid(
                        "gamma",
                        other,
                        "LOND-type rules need a summable (geometric) gamma",
                    ))
                }
                None => return Err(Error::invalid("gamma", "none", "required for LOND-type rules")),
            },
            Family::Lord | Family::Saffron => self
                .omega
                .ok_or_else(|| Error::invalid("omega", "none", "required for LORD/SAFFRON-type rules"))?
                .validate()?,
        }
        if family == Family::Saffron {
            match self.lambda {
                Some(Schedule::Rai { .. }) => {
                    return Err(Error::invalid("lambda", "rai", "candidate thresholds cannot use rai"))
                }
                Some(l) => l.validate()?,
                None => return Err(Error::invalid("lambda", "none", "required for SAFFRON-type rules")),
            }
        }
        Ok(())
    }
}
