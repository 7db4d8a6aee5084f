//! Online false discovery rate control with e-values and p-values.
//!
//! The overshoot-refund rules (SCORE and the retroactive SCORE+) sit next to
//! their LOND, LORD and SAFFRON baselines in [`procedures`]; [`simulation`]
//! runs seeded Monte-Carlo studies and [`cli`] drives everything from CSV.

// negated comparisons are how NaN gets rejected throughout
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod cli;
pub mod error;
pub mod normal;
pub mod procedures;
pub mod reference;
pub mod refund;
pub mod schedule;
pub mod simulation;
pub mod types;
