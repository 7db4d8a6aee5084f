//! Writes the bundled synthetic p-value stream used by the ingest tests:
//! 10,000 one-sided z-test p-values, 20% non-null with mean shift 4.
//!
//! cargo run -p score-fdr --example make_synthetic > crates/core/tests/data/synthetic_pvalues.csv

use score_fdr::cli::report::fmt_real;
use score_fdr::normal;
use score_fdr::simulation::rng::{open_uniform, rng_for, std_normal};

const ROWS: u64 = 10_000;
const PI1: f64 = 0.2;
const SHIFT: f64 = 4.0;
const SEED: u64 = 20_240_601;

fn main() {
    let mut rng = rng_for(SEED);
    println!("index,p,truth");
    for i in 1..=ROWS {
        let non_null = open_uniform(&mut rng) < PI1;
        let z = std_normal(&mut rng) + if non_null { SHIFT } else { 0.0 };
        println!("{i},{},{}", fmt_real(normal::sf(z)), u8::from(non_null));
    }
}
