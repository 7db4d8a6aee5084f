//! Random variates by inverse CDF on top of ChaCha8.
//!
//! Every variate consumes exactly one `u64` from the generator, so the
//! position of each draw in the stream is fixed by the sampling order alone.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::normal;

pub type SimRng = ChaCha8Rng;

pub fn rng_for(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform on the open interval `(0, 1)`: `((u >> 12) + 0.5) / 2^52`.
///
/// With 53 bits the largest value would round to 1.0.
#[inline]
pub fn open_uniform<R: RngCore>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

#[inline]
pub fn std_normal<R: RngCore>(rng: &mut R) -> f64 {
    normal::quantile(open_uniform(rng))
}

/// Exponential with the given rate, `-ln(U) / rate`.
#[inline]
pub fn exponential<R: RngCore>(rng: &mut R, rate: f64) -> f64 {
    -open_uniform(rng).ln() / rate
}
