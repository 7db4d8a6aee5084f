//! Predictable parameter sequences.
//!
//! LOND-type rules spend a summable sequence `gamma_t`; LORD- and
//! SAFFRON-type rules invest a fraction `omega_t` of the remaining wealth,
//! and SAFFRON-type rules screen candidates with `lambda_t`.
//!
//! Rejection-adjusted investment (RAI) raises `omega` after quiet stretches
//! and lowers it after rejections:
//!
//! ```text
//!     omega_{t+1} = w1 + w1 * ( sum_{j=1}^{t-R_t} phi^j - sum_{j=1}^{R_t} psi^j )
//! ```

use std::fmt;
use std::str::FromStr;

use crate::error::{check_unit_open, Error, Result};

/// Lower clamp for RAI output; the upper clamp is `1 - OMEGA_MIN`.
pub const OMEGA_MIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Schedule {
    Constant(f64),
    /// `gamma_t = (1 - q) q^(t-1)`, sums to one.
    Geometric(f64),
    Rai { omega1: f64, phi: f64, psi: f64 },
}

impl Schedule {
    pub fn constant(c: f64) -> Result<Self> {
        check_unit_open("schedule constant", c).map(Schedule::Constant)
    }

    pub fn geometric(q: f64) -> Result<Self> {
        check_unit_open("geometric ratio", q).map(Schedule::Geometric)
    }

    pub fn rai(omega1: f64, phi: f64, psi: f64) -> Result<Self> {
        check_unit_open("rai omega1", omega1)?;
        check_unit_open("rai phi", phi)?;
        check_unit_open("rai psi", psi)?;
        Ok(Schedule::Rai { omega1, phi, psi })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Schedule::Constant(c) => Schedule::constant(c).map(drop),
            Schedule::Geometric(q) => Schedule::geometric(q).map(drop),
            Schedule::Rai { omega1, phi, psi } => Schedule::rai(omega1, phi, psi).map(drop),
        }
    }

    /// True when the value never depends on the rejection history.
    pub fn is_deterministic(&self) -> bool {
        !matches!(self, Schedule::Rai { .. })
    }

    /// Value for step `t` given `rejections_before = R_{t-1}`.
    pub fn value(&self, t: u64, rejections_before: u64) -> Result<f64> {
        match *self {
            Schedule::Constant(_) | Schedule::Geometric(_) => gamma_at(self, t),
            Schedule::Rai { omega1, phi, psi } => {
                // omega_t is the RAI output after t - 1 completed steps
                rai_omega(omega1, phi, psi, t.saturating_sub(1), rejections_before)
            }
        }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::Constant(c) => write!(f, "constant({c})"),
            Schedule::Geometric(q) => write!(f, "geometric({q})"),
            Schedule::Rai { omega1, phi, psi } => write!(f, "rai({omega1},{phi},{psi})"),
        }
    }
}

/// Parses `constant(c)`, `geometric(q)`, `rai(w1,phi,psi)` or a bare number
/// (read as a constant).
impl FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::invalid("schedule", s, "expected constant(c), geometric(q) or rai(w1,phi,psi)");
        if let Ok(c) = s.parse::<f64>() {
            return Schedule::constant(c);
        }
        let open = s.find('(').ok_or_else(bad)?;
        let body = s[open + 1..].strip_suffix(')').ok_or_else(bad)?;
        let args = body
            .split(',')
            .map(|a| a.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        match (s[..open].trim().to_ascii_lowercase().as_str(), args.as_slice()) {
            ("constant", [c]) => Schedule::constant(*c),
            ("geometric", [q]) => Schedule::geometric(*q),
            ("rai", [w, phi, psi]) => Schedule::rai(*w, *phi, *psi),
            _ => Err(bad()),
        }
    }
}

/// The `t`-th element of a history-free sequence.
pub fn gamma_at(schedule: &Schedule, t: u64) -> Result<f64> {
    if t == 0 {
        return Err(Error::invalid("t", t, "steps are numbered from 1"));
    }
    match *schedule {
        Schedule::Constant(c) => Ok(c),
        Schedule::Geometric(q) => Ok((1.0 - q) * q.powf((t - 1) as f64)),
        Schedule::Rai { .. } => Err(Error::invalid(
            "gamma",
            schedule,
            "rai weights depend on rejections and are not summable",
        )),
    }
}

/// `phi + phi^2 + ... + phi^k`
fn geometric_partial(phi: f64, k: u64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    phi * (1.0 - phi.powf(k as f64)) / (1.0 - phi)
}

/// RAI investment weight `omega_{t+1}` after `t` steps with `rejections`
/// discoveries, clamped to `[OMEGA_MIN, 1 - OMEGA_MIN]`.
pub fn rai_omega(omega1: f64, phi: f64, psi: f64, t: u64, rejections: u64) -> Result<f64> {
    if rejections > t {
        return Err(Error::invalid("rejections", rejections, "cannot exceed t"));
    }
    let quiet = geometric_partial(phi, t - rejections);
    let hits = geometric_partial(psi, rejections);
    let w = omega1 + omega1 * (quiet - hits);
    Ok(w.clamp(OMEGA_MIN, 1.0 - OMEGA_MIN))
}
