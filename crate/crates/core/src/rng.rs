//! Seed derivation.
//!
//! Every random draw in a run comes from a ChaCha8 generator keyed by the
//! run's base seed. Independent consumers get independent ChaCha streams:
//! trial `i` reads stream `i`, and the few non-trial consumers read streams
//! reserved at the top of the 64-bit range.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use num_complex::Complex64;

use crate::math;

pub type StreamRng = ChaCha8Rng;

/// Stream used for drawing the delays of the delay-averaged interference profile.
pub const PROFILE_STREAM: u64 = u64::MAX;
/// Stream used by the Monte Carlo interference estimator when driven from a seed.
pub const MC_STREAM_BASE: u64 = u64::MAX - (1 << 32);

/// Generator for `stream` under `base_seed`.
pub fn stream_rng(base_seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(stream);
    rng
}

/// Generator for Monte Carlo trial `trial_index`.
pub fn trial_rng(base_seed: u64, trial_index: u64) -> StreamRng {
    stream_rng(base_seed, trial_index)
}

/// Circularly-symmetric complex Gaussian with total variance `var`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = math::sqrt(0.5 * var);
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}
