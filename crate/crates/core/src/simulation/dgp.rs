//! Synthetic data-generating processes.
//!
//! Draw order per step is fixed and independent of the outcome, so two
//! configs differing only in `pi1` share their noise:
//!
//! * Gaussian mixture: `u_theta`, `z_signal`, `z_noise`.
//! * AR-exponential: `u_theta`, `u_mu`, `u_x`.
//! * AR(1): `z_0` once, then `u_theta`, `z_eps` per step.

use std::fmt;
use std::str::FromStr;

use crate::calibration::{
    ar1_conditional_pvalue, ar1_marginal_pvalue_with, lr_evalue, LikelihoodRatioSpec,
};
use crate::error::{Error, Result};
use crate::normal;
use crate::simulation::rng::{exponential, open_uniform, rng_for, std_normal};
use crate::types::{EvidenceKind, Observation};

/// Alternative means in the Gaussian mixture are `N(SIGNAL_MEAN, SIGNAL_VAR)`.
pub const SIGNAL_MEAN: f64 = 3.0;
pub const SIGNAL_VAR: f64 = 5.0;
/// Working alternative factor used by the AR-exponential e-value.
pub const AR_EXP_FACTOR: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DgpKind {
    GaussianMixture,
    ArExponential,
    Ar1Gaussian,
}

impl DgpKind {
    pub fn name(self) -> &'static str {
        match self {
            DgpKind::GaussianMixture => "gaussian_mixture",
            DgpKind::ArExponential => "ar_exponential",
            DgpKind::Ar1Gaussian => "ar1_gaussian",
        }
    }
}

impl fmt::Display for DgpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DgpKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "gaussian_mixture" | "gaussian" => Ok(DgpKind::GaussianMixture),
            "ar_exponential" | "ar_exp" => Ok(DgpKind::ArExponential),
            "ar1_gaussian" | "ar1" => Ok(DgpKind::Ar1Gaussian),
            _ => Err(Error::invalid("dgp", s, "expected gaussian_mixture, ar_exponential or ar1_gaussian")),
        }
    }
}

/// Which p-value an AR(1) stream feeds to p-value procedures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PValueSource {
    Conditional,
    Marginal,
}

impl FromStr for PValueSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "conditional" => Ok(PValueSource::Conditional),
            "marginal" => Ok(PValueSource::Marginal),
            _ => Err(Error::invalid("pvalues", s, "expected conditional or marginal")),
        }
    }
}

impl fmt::Display for PValueSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PValueSource::Conditional => "conditional",
            PValueSource::Marginal => "marginal",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DgpConfig {
    pub dgp: DgpKind,
    pub horizon: u64,
    pub pi1: f64,
    /// AR-exponential dependence, `eta_t = 1 + rho X_{t-1}`.
    pub rho: f64,
    /// AR-exponential signal strengths, drawn uniformly.
    pub mu_set: Vec<f64>,
    pub phi0: f64,
    pub phi1: f64,
    pub seed: u64,
    pub pvalues: PValueSource,
}

impl DgpConfig {
    /// Defaults of the experiments: `T = 1000`, `pi1 = 0.3`, `rho = 0.5`,
    /// `mu in {3, 20}`, `phi0 = 0.5`, `phi1 = 3`.
    pub fn new(dgp: DgpKind) -> Self {
        DgpConfig {
            dgp,
            horizon: 1000,
            pi1: 0.3,
            rho: 0.5,
            mu_set: vec![3.0, 20.0],
            phi0: 0.5,
            phi1: 3.0,
            seed: 0,
            pvalues: PValueSource::Conditional,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::invalid("horizon", self.horizon, "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.pi1) {
            return Err(Error::invalid("pi1", self.pi1, "must lie in [0, 1]"));
        }
        match self.dgp {
            DgpKind::GaussianMixture => {}
            DgpKind::ArExponential => {
                // negative rho could drive the rate eta_t below zero
                if !(self.rho >= 0.0 && self.rho.is_finite()) {
                    return Err(Error::invalid("rho", self.rho, "must be finite and non-negative"));
                }
                if self.mu_set.is_empty() {
                    return Err(Error::invalid("mu_set", "[]", "must be non-empty"));
                }
                if let Some(&m) = self.mu_set.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
                    return Err(Error::invalid("mu_set", m, "signal strengths must be positive"));
                }
            }
            DgpKind::Ar1Gaussian => {
                if !(self.phi0.abs() < 1.0) {
                    return Err(Error::invalid("phi0", self.phi0, "null process must be stationary, |phi0| < 1"));
                }
                if !self.phi1.is_finite() {
                    return Err(Error::invalid("phi1", self.phi1, "must be finite"));
                }
            }
        }
        Ok(())
    }
}

/// One generated stream.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedStream {
    /// `X_1..X_T`.
    pub x: Vec<f64>,
    /// `X_0` (zero for the Gaussian mixture).
    pub x0: f64,
    /// `theta_t`, true for non-nulls.
    pub truth: Vec<bool>,
    /// Signal parameter per step: `mu_t` for the mixtures, `phi_t` for AR(1).
    pub signal: Vec<f64>,
    pub e: Vec<f64>,
    /// Conditionally valid p-values.
    pub p: Vec<f64>,
    /// Marginal-only p-values, AR(1) only.
    pub p_marginal: Option<Vec<f64>>,
    pub pvalue_source: PValueSource,
}

impl GeneratedStream {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// The p-values selected by the config's `pvalues` setting.
    pub fn selected_p(&self) -> &[f64] {
        match (self.pvalue_source, &self.p_marginal) {
            (PValueSource::Marginal, Some(m)) => m,
            _ => &self.p,
        }
    }

    /// Observations of the requested kind, indexed from 1, with truth attached.
    pub fn observations(&self, kind: EvidenceKind) -> Result<Vec<Observation>> {
        let values = match kind {
            EvidenceKind::EValue => &self.e[..],
            EvidenceKind::PValue => self.selected_p(),
        };
        values
            .iter()
            .zip(&self.truth)
            .enumerate()
            .map(|(i, (&v, &th))| {
                let idx = i as u64 + 1;
                let obs = match kind {
                    EvidenceKind::EValue => Observation::e_value(idx, v)?,
                    EvidenceKind::PValue => Observation::p_value(idx, v)?,
                };
                Ok(obs.with_truth(th))
            })
            .collect()
    }
}

/// Draws one stream; the result depends only on `config`, seed included.
pub fn generate(config: &DgpConfig) -> Result<GeneratedStream> {
    config.validate()?;
    let mut rng = rng_for(config.seed);
    let n = config.horizon as usize;
    let mut out = GeneratedStream {
        x: Vec::with_capacity(n),
        x0: 0.0,
        truth: Vec::with_capacity(n),
        signal: Vec::with_capacity(n),
        e: Vec::with_capacity(n),
        p: Vec::with_capacity(n),
        p_marginal: None,
        pvalue_source: config.pvalues,
    };

    match config.dgp {
        DgpKind::GaussianMixture => {
            let spec = LikelihoodRatioSpec::gaussian_pair(0.0, 1.0, SIGNAL_MEAN, SIGNAL_VAR + 1.0)?;
            for _ in 0..n {
                let theta = open_uniform(&mut rng) < config.pi1;
                let z_signal = std_normal(&mut rng);
                let z_noise = std_normal(&mut rng);
                let mu = if theta { SIGNAL_MEAN + SIGNAL_VAR.sqrt() * z_signal } else { 0.0 };
                let x = mu + z_noise;
                out.truth.push(theta);
                out.signal.push(mu);
                out.x.push(x);
                out.e.push(lr_evalue(&spec, x, None)?);
                out.p.push(normal::sf(x));
            }
        }
        DgpKind::ArExponential => {
            let spec = LikelihoodRatioSpec::exponential_scale(AR_EXP_FACTOR)?;
            let k = config.mu_set.len();
            let mut prev = 0.0;
            for _ in 0..n {
                let theta = open_uniform(&mut rng) < config.pi1;
                let u_mu = open_uniform(&mut rng);
                let eta = 1.0 + config.rho * prev;
                let mu = config.mu_set[((u_mu * k as f64) as usize).min(k - 1)];
                let rate = if theta { eta / mu } else { eta };
                let x = exponential(&mut rng, rate);
                out.truth.push(theta);
                out.signal.push(if theta { mu } else { 1.0 });
                out.x.push(x);
                out.e.push(lr_evalue(&spec, x, Some(eta))?);
                // null survival function of Exp(eta)
                out.p.push((-eta * x).exp());
                prev = x;
            }
        }
        DgpKind::Ar1Gaussian => {
            let spec = LikelihoodRatioSpec::ar1_gaussian(config.phi0, config.phi1)?;
            let stationary_sd = (1.0 / (1.0 - config.phi0 * config.phi0)).sqrt();
            let mut prev = stationary_sd * std_normal(&mut rng);
            out.x0 = prev;
            let mut marginal = Vec::with_capacity(n);
            for _ in 0..n {
                let theta = open_uniform(&mut rng) < config.pi1;
                let eps = std_normal(&mut rng);
                let phi = if theta { config.phi1 } else { config.phi0 };
                let x = phi * prev + eps;
                out.truth.push(theta);
                out.signal.push(phi);
                out.x.push(x);
                out.e.push(lr_evalue(&spec, x, Some(prev))?);
                out.p.push(ar1_conditional_pvalue(x, prev, config.phi0));
                marginal.push(ar1_marginal_pvalue_with(x, config.phi0));
                prev = x;
            }
            out.p_marginal = Some(marginal);
        }
    }
    Ok(out)
}
