//! The overshoot-refund primitive and the two FDP estimators.
//!
//! A rejection happens when `alpha_t * e_t >= 1`. Every e-value procedure
//! bounds the rejection indicator by `alpha_t * e_t`; the sharper bound
//!
//! ```text
//!     1{y >= 1} <= y - (y - 1)_+          (y >= 0)
//! ```
//!
//! shows the part of `alpha_t * e_t` above one, the *overshoot*
//! `O_t = (alpha_t e_t - 1)_+`, can be handed back to the budget: a cost
//! `C_t` may be replaced by `(C_t - O_t)_+`.
//!
//! Procedures keep an estimate of the false discovery proportion built from
//! these costs, with either a local denominator (rejections at decision time)
//! or a global one (rejections so far).

use crate::error::{check_unit_open, Error, Result};

/// `(alpha * e - 1)_+`.
pub fn overshoot(alpha: f64, e: f64) -> Result<f64> {
    check_unit_open("alpha", alpha)?;
    if !(e >= 0.0) {
        return Err(Error::invalid("e-value", e, "must be non-negative"));
    }
    Ok(overshoot_unchecked(alpha, e))
}

/// `overshoot` without range checks; `alpha_t` values produced by a running
/// procedure may legitimately reach 1 or 0.
#[inline]
pub(crate) fn overshoot_unchecked(alpha: f64, e: f64) -> f64 {
    (alpha * e - 1.0).max(0.0)
}

/// `(base_cost - overshoot)_+`.
#[inline]
pub fn refund_adjusted_cost(base_cost: f64, overshoot: f64) -> f64 {
    (base_cost - overshoot).max(0.0)
}

/// `sum_j costs[j] / (rejections_before[j] + 1)`.
pub fn fdp_local(costs: &[f64], rejections_before: &[u64]) -> Result<f64> {
    if costs.len() != rejections_before.len() {
        return Err(Error::LengthMismatch {
            left: costs.len(),
            right: rejections_before.len(),
        });
    }
    Ok(costs
        .iter()
        .zip(rejections_before)
        .map(|(&c, &r)| c / (r as f64 + 1.0))
        .sum())
}

/// `(sum costs) / max(current_rejections, 1)`.
pub fn fdp_global(costs: &[f64], current_rejections: u64) -> f64 {
    costs.iter().sum::<f64>() / current_rejections.max(1) as f64
}
