//! Builders for valid e-values and p-values.

use crate::error::{Error, Result};
use crate::normal;

/// Smallest p passed to the calibrator; smaller inputs are raised to it.
pub const P_FLOOR: f64 = 1e-300;
/// Within this distance of 1 the calibrator returns its limit 1/2.
const P_ONE_TOL: f64 = 1e-12;
/// Below this `1 - p` the calibrator switches to a series in `1 - p`.
const SERIES_CUTOFF: f64 = 1e-2;

/// Vovk's calibrator `e = (1 - p + p ln p) / (p (ln p)^2)`.
///
/// Integrates to one over uniform `p`. `p = 1` maps to the limit 1/2.
pub fn vovk_p_to_e(p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::invalid("p-value", p, "calibrator needs p in (0, 1]"));
    }
    let q = 1.0 - p;
    if q <= P_ONE_TOL {
        return Ok(0.5);
    }
    if q < SERIES_CUTOFF {
        // numerator = sum_{k>=2} q^k / (k (k-1)); direct evaluation cancels
        let mut num = 0.0;
        let mut qk = q * q;
        for k in 2..16u32 {
            num += qk / f64::from(k * (k - 1));
            qk *= q;
        }
        let l = (-q).ln_1p();
        return Ok(num / (p * l * l));
    }
    let p = p.max(P_FLOOR);
    let l = p.ln();
    Ok((1.0 - p + p * l) / (p * l * l))
}

/// Null calibration scores for conformal e-values.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSet {
    scores: Vec<f64>,
    sum: f64,
}

impl CalibrationSet {
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::invalid("calibration set", "[]", "must be non-empty"));
        }
        if let Some(&s) = scores.iter().find(|s| !s.is_finite() || **s < 0.0) {
            return Err(Error::invalid("calibration score", s, "must be finite and non-negative"));
        }
        let sum = scores.iter().sum();
        Ok(CalibrationSet { scores, sum })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// `s / ((sum(cal) + s) / (n + 1))`.
pub fn conformal_evalue(test_score: f64, cal: &CalibrationSet) -> Result<f64> {
    if !test_score.is_finite() || test_score < 0.0 {
        return Err(Error::invalid("test score", test_score, "must be finite and non-negative"));
    }
    let total = cal.sum + test_score;
    if total <= 0.0 {
        return Err(Error::DegenerateCalibration);
    }
    Ok(test_score / (total / (cal.len() as f64 + 1.0)))
}

/// Parametric null/alternative pairs whose density ratio is an e-value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LikelihoodRatioSpec {
    /// `N(alt_mean, alt_var)` against `N(null_mean, null_var)`.
    GaussianPair {
        null_mean: f64,
        null_var: f64,
        alt_mean: f64,
        alt_var: f64,
    },
    /// `Exp(rate eta / factor)` against `Exp(rate eta)`; `eta` is the context.
    ExponentialScale { factor: f64 },
    /// `N(phi1 x_prev, 1)` against `N(phi0 x_prev, 1)`; `x_prev` is the context.
    Ar1Gaussian { phi0: f64, phi1: f64 },
}

impl LikelihoodRatioSpec {
    pub fn gaussian_pair(null_mean: f64, null_var: f64, alt_mean: f64, alt_var: f64) -> Result<Self> {
        for (name, v) in [("null variance", null_var), ("alternative variance", alt_var)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, v, "must be positive"));
            }
        }
        if !null_mean.is_finite() || !alt_mean.is_finite() {
            return Err(Error::invalid("mean", format!("{null_mean}, {alt_mean}"), "must be finite"));
        }
        Ok(LikelihoodRatioSpec::GaussianPair {
            null_mean,
            null_var,
            alt_mean,
            alt_var,
        })
    }

    pub fn exponential_scale(factor: f64) -> Result<Self> {
        if !(factor > 1.0 && factor.is_finite()) {
            return Err(Error::invalid("scale factor", factor, "must exceed 1"));
        }
        Ok(LikelihoodRatioSpec::ExponentialScale { factor })
    }

    pub fn ar1_gaussian(phi0: f64, phi1: f64) -> Result<Self> {
        if !phi0.is_finite() || !phi1.is_finite() {
            return Err(Error::invalid("ar coefficient", format!("{phi0}, {phi1}"), "must be finite"));
        }
        Ok(LikelihoodRatioSpec::Ar1Gaussian { phi0, phi1 })
    }

    /// The mixture-marginal pair used for the Gaussian experiments:
    /// `N(3, 1 + 5)` against `N(0, 1)`.
    pub fn gaussian_mixture_default() -> Self {
        LikelihoodRatioSpec::GaussianPair {
            null_mean: 0.0,
            null_var: 1.0,
            alt_mean: 3.0,
            alt_var: 6.0,
        }
    }
}

/// Log of the density ratio.
pub fn lr_log_evalue(spec: &LikelihoodRatioSpec, x: f64, context: Option<f64>) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::invalid("observation", x, "must be finite"));
    }
    match *spec {
        LikelihoodRatioSpec::GaussianPair {
            null_mean,
            null_var,
            alt_mean,
            alt_var,
        } => Ok(normal::ln_pdf(x, alt_mean, alt_var) - normal::ln_pdf(x, null_mean, null_var)),
        LikelihoodRatioSpec::ExponentialScale { factor } => {
            let eta = context.ok_or(Error::MissingContext("exponential rate eta"))?;
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(Error::invalid("eta", eta, "rate must be positive"));
            }
            if x < 0.0 {
                return Err(Error::invalid("observation", x, "exponential support is [0, inf)"));
            }
            Ok(eta * x * (1.0 - 1.0 / factor) - factor.ln())
        }
        LikelihoodRatioSpec::Ar1Gaussian { phi0, phi1 } => {
            let prev = context.ok_or(Error::MissingContext("previous observation"))?;
            if !prev.is_finite() {
                return Err(Error::invalid("previous observation", prev, "must be finite"));
            }
            let r0 = x - phi0 * prev;
            let r1 = x - phi1 * prev;
            Ok(0.5 * (r0 * r0 - r1 * r1))
        }
    }
}

/// Density ratio, clamped to `f64::MAX` when it overflows.
pub fn lr_evalue(spec: &LikelihoodRatioSpec, x: f64, context: Option<f64>) -> Result<f64> {
    lr_log_evalue(spec, x, context).map(|l| l.exp().min(f64::MAX))
}

/// `1 - Phi(x_t - phi0 x_prev)`; uniform under the null given the past.
pub fn ar1_conditional_pvalue(x_t: f64, x_prev: f64, phi0: f64) -> f64 {
    normal::sf(x_t - phi0 * x_prev)
}

/// `1 - Phi(x_t / sqrt(4/3))`, the stationary null marginal for `phi0 = 0.5`.
///
/// Valid for each `t` on its own but not conditionally on the past: under
/// serial dependence procedures fed these p-values lose FDR control.
pub fn ar1_marginal_pvalue(x_t: f64) -> f64 {
    normal::sf(x_t / (4.0f64 / 3.0).sqrt())
}

/// Marginal p-value for a general null coefficient, variance `1/(1 - phi0^2)`.
pub fn ar1_marginal_pvalue_with(x_t: f64, phi0: f64) -> f64 {
    normal::sf(x_t * (1.0 - phi0 * phi0).sqrt())
}
