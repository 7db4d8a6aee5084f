//! Flat `key = value` run configuration.
//!
//! ```text
//! # comment
//! mode = simulate
//! procedure = score-lord, e-lord
//! omega = rai(0.05, 0.5, 0.5)
//! ```
//!
//! Keys are case-sensitive, values are trimmed, `#` starts a comment
//! anywhere on a line, lists are comma-separated. A key may appear once.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::procedures::{Family, ProcedureConfig, ProcedureKind, DEFAULT_GAMMA, DEFAULT_LAMBDA, DEFAULT_OMEGA};
use crate::schedule::Schedule;
use crate::simulation::{DgpConfig, DgpKind, PValueSource};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Simulate,
    Ingest,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simulate" => Ok(Mode::Simulate),
            "ingest" => Ok(Mode::Ingest),
            _ => Err(Error::invalid("mode", s, "expected simulate or ingest")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Simulate => "simulate",
            Mode::Ingest => "ingest",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Calibrator {
    None,
    Vovk,
    Conformal,
}

impl FromStr for Calibrator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Calibrator::None),
            "vovk" => Ok(Calibrator::Vovk),
            "conformal" => Ok(Calibrator::Conformal),
            _ => Err(Error::invalid("calibrator", s, "expected none, vovk or conformal")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub procedures: Vec<ProcedureKind>,
    pub alpha: f64,
    pub gamma: Schedule,
    pub omega: Schedule,
    pub lambda: Schedule,
    pub dgp: DgpConfig,
    pub replicates: usize,
    pub checkpoints: Option<Vec<u64>>,
    pub checkpoint_stride: Option<u64>,
    pub input: Option<PathBuf>,
    pub calibrator: Calibrator,
    pub calibration: Option<PathBuf>,
    pub output_dir: PathBuf,
}

impl RunConfig {
    pub fn defaults(mode: Mode) -> Self {
        RunConfig {
            mode,
            procedures: vec![ProcedureKind::ScoreLord],
            alpha: 0.05,
            gamma: DEFAULT_GAMMA,
            omega: DEFAULT_OMEGA,
            lambda: DEFAULT_LAMBDA,
            dgp: DgpConfig::new(DgpKind::GaussianMixture),
            replicates: 500,
            checkpoints: None,
            checkpoint_stride: None,
            input: None,
            calibrator: Calibrator::None,
            calibration: None,
            output_dir: PathBuf::from("."),
        }
    }

    /// One validated `ProcedureConfig` per listed procedure, carrying the
    /// schedules its family uses.
    pub fn procedure_configs(&self) -> Result<Vec<ProcedureConfig>> {
        self.procedures
            .iter()
            .map(|&kind| {
                let base = ProcedureConfig::new(kind, self.alpha)?;
                match kind.family() {
                    Family::Lond => base.with_gamma(self.gamma),
                    Family::Lord => base.with_omega(self.omega),
                    Family::Saffron => base.with_omega(self.omega)?.with_lambda(self.lambda),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scope {
    Any,
    Simulate,
    Ingest,
}

const KEYS: &[(&str, Scope)] = &[
    ("mode", Scope::Any),
    ("procedure", Scope::Any),
    ("alpha", Scope::Any),
    ("gamma", Scope::Any),
    ("omega", Scope::Any),
    ("lambda", Scope::Any),
    ("output_dir", Scope::Any),
    ("dgp", Scope::Simulate),
    ("horizon", Scope::Simulate),
    ("pi1", Scope::Simulate),
    ("rho", Scope::Simulate),
    ("mu_set", Scope::Simulate),
    ("phi0", Scope::Simulate),
    ("phi1", Scope::Simulate),
    ("seed", Scope::Simulate),
    ("replicates", Scope::Simulate),
    ("pvalues", Scope::Simulate),
    ("checkpoints", Scope::Simulate),
    ("checkpoint_stride", Scope::Simulate),
    ("input", Scope::Ingest),
    ("calibrator", Scope::Ingest),
    ("calibration", Scope::Ingest),
];

/// True for keys the config format knows.
pub fn is_known_key(key: &str) -> bool {
    KEYS.iter().any(|(k, _)| *k == key)
}

/// A parsed entry; `line` is 0 for command-line overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct Entry {
    pub line: usize,
    pub value: String,
}

/// Splits a document into `key -> entry`, rejecting unknown and repeated keys.
pub fn parse_entries(text: &str) -> Result<BTreeMap<String, Entry>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::Config {
            line,
            message: format!("expected `key = value`, got `{content}`"),
        })?;
        let key = key.trim();
        if !KEYS.iter().any(|(k, _)| *k == key) {
            return Err(Error::Config {
                line,
                message: format!("unknown key `{key}`"),
            });
        }
        let entry = Entry {
            line,
            value: value.trim().to_string(),
        };
        if let Some(prev) = out.insert(key.to_string(), entry) {
            return Err(Error::Config {
                line,
                message: format!("key `{key}` already set on line {}", prev.line),
            });
        }
    }
    Ok(out)
}

fn num<T: FromStr>(v: &str) -> std::result::Result<T, String> {
    v.parse::<T>().map_err(|_| format!("cannot parse `{v}` as a number"))
}

fn list<T: FromStr>(v: &str) -> std::result::Result<Vec<T>, String> {
    v.split(',').map(|x| num(x.trim())).collect()
}

fn apply(cfg: &mut RunConfig, key: &str, v: &str) -> Result<()> {
    let wrap = |m: String| Error::Config {
        line: 0,
        message: format!("{key} = {v}: {m}"),
    };
    match key {
        "mode" => {}
        "procedure" => {
            cfg.procedures = v
                .split(',')
                .map(|p| p.trim().parse::<ProcedureKind>())
                .collect::<Result<_>>()?;
            if cfg.procedures.is_empty() {
                return Err(wrap("empty procedure list".into()));
            }
        }
        "alpha" => {
            cfg.alpha = num(v).map_err(wrap)?;
            crate::error::check_unit_open("alpha", cfg.alpha)?;
        }
        "gamma" => cfg.gamma = v.parse()?,
        "omega" => cfg.omega = v.parse()?,
        "lambda" => cfg.lambda = v.parse()?,
        "output_dir" => cfg.output_dir = PathBuf::from(v),
        "dgp" => cfg.dgp.dgp = v.parse()?,
        "horizon" => cfg.dgp.horizon = num(v).map_err(wrap)?,
        "pi1" => cfg.dgp.pi1 = num(v).map_err(wrap)?,
        "rho" => cfg.dgp.rho = num(v).map_err(wrap)?,
        "mu_set" => cfg.dgp.mu_set = list(v).map_err(wrap)?,
        "phi0" => cfg.dgp.phi0 = num(v).map_err(wrap)?,
        "phi1" => cfg.dgp.phi1 = num(v).map_err(wrap)?,
        "seed" => cfg.dgp.seed = num(v).map_err(wrap)?,
        "replicates" => {
            cfg.replicates = num(v).map_err(wrap)?;
            if cfg.replicates == 0 {
                return Err(wrap("must be at least 1".into()));
            }
        }
        "pvalues" => cfg.dgp.pvalues = v.parse::<PValueSource>()?,
        "checkpoints" => cfg.checkpoints = Some(list(v).map_err(wrap)?),
        "checkpoint_stride" => cfg.checkpoint_stride = Some(num(v).map_err(wrap)?),
        "input" => cfg.input = Some(PathBuf::from(v)),
        "calibrator" => cfg.calibrator = v.parse()?,
        "calibration" => cfg.calibration = Some(PathBuf::from(v)),
        _ => unreachable!("keys are checked in parse_entries"),
    }
    Ok(())
}

fn at_line(line: usize, e: Error) -> Error {
    match e {
        Error::Config { line: 0, message } => Error::Config { line, message },
        Error::Config { .. } => e,
        other => Error::Config {
            line,
            message: other.to_string(),
        },
    }
}

/// Parses a document that must name its own `mode`.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    build(parse_entries(text)?, None)
}

/// Builds a config from parsed entries. `mode`, when given, comes from the
/// subcommand and must agree with any `mode` key.
pub fn build(entries: BTreeMap<String, Entry>, mode: Option<Mode>) -> Result<RunConfig> {
    let mode = match (entries.get("mode"), mode) {
        (Some(e), None) => e.value.parse::<Mode>().map_err(|err| at_line(e.line, err))?,
        (Some(e), Some(m)) => {
            let named = e.value.parse::<Mode>().map_err(|err| at_line(e.line, err))?;
            if named != m {
                return Err(Error::Config {
                    line: e.line,
                    message: format!("mode = {named} conflicts with the `{m}` subcommand"),
                });
            }
            m
        }
        (None, Some(m)) => m,
        (None, None) => {
            return Err(Error::Config {
                line: 0,
                message: "missing `mode`".into(),
            })
        }
    };

    let mut cfg = RunConfig::defaults(mode);
    for (key, e) in &entries {
        let scope = KEYS.iter().find(|(k, _)| k == key).map(|(_, s)| *s).unwrap_or(Scope::Any);
        let fits = match scope {
            Scope::Any => true,
            Scope::Simulate => mode == Mode::Simulate,
            Scope::Ingest => mode == Mode::Ingest,
        };
        if !fits {
            return Err(Error::Config {
                line: e.line,
                message: format!("key `{key}` does not apply in {mode} mode"),
            });
        }
        apply(&mut cfg, key, &e.value).map_err(|err| at_line(e.line, err))?;
    }

    let line_of = |k: &str| entries.get(k).map_or(0, |e| e.line);
    match mode {
        Mode::Simulate => {
            cfg.dgp.validate().map_err(|e| {
                let line = match &e {
                    Error::InvalidParameter { name, .. } => line_of(name),
                    _ => 0,
                };
                at_line(line, e)
            })?;
        }
        Mode::Ingest => {
            if cfg.input.is_none() {
                return Err(Error::Config {
                    line: 0,
                    message: "ingest mode needs `input`".into(),
                });
            }
            if cfg.calibrator == Calibrator::Conformal && cfg.calibration.is_none() {
                return Err(Error::Config {
                    line: line_of("calibrator"),
                    message: "calibrator = conformal needs `calibration`".into(),
                });
            }
            if cfg.calibrator != Calibrator::Conformal && cfg.calibration.is_some() {
                return Err(Error::Config {
                    line: line_of("calibration"),
                    message: "`calibration` is only used with calibrator = conformal".into(),
                });
            }
        }
    }
    cfg.procedure_configs().map_err(|e| at_line(line_of("procedure"), e))?;
    Ok(cfg)
}
