//! Frequency-selective Rayleigh channel with an exponential power delay profile.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{ChannelConfig, OfdmConfig};
use crate::math;
use crate::rng::complex_gaussian;

/// One channel draw: time-domain taps and the per-subcarrier response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    pub taps: Vec<Complex64>,
    /// N-point DFT of the zero-padded taps.
    pub freq_response: Vec<Complex64>,
    /// `|H_k|²`.
    pub gains_sq: Vec<f64>,
}

impl ChannelRealization {
    /// Builds the realization for the given taps over `num_subcarriers` bins.
    pub fn from_taps(taps: Vec<Complex64>, num_subcarriers: usize) -> ChannelRealization {
        let n = num_subcarriers;
        let freq_response: Vec<Complex64> = (0..n)
            .map(|k| {
                taps.iter()
                    .enumerate()
                    .map(|(t, h)| {
                        let idx = (k * t) % n;
                        let (s, c) = math::sin_cos(-2.0 * PI * idx as f64 / n as f64);
                        h * Complex64::new(c, s)
                    })
                    .sum()
            })
            .collect();
        let gains_sq = freq_response.iter().map(|h| h.norm_sqr()).collect();
        ChannelRealization {
            taps,
            freq_response,
            gains_sq,
        }
    }

    pub fn num_subcarriers(&self) -> usize {
        self.freq_response.len()
    }
}

/// `σ_c² = 1 / Σ_n e^{−nΞ}`, which makes the taps carry unit total power and
/// therefore `E{|H_k|²} = 1` on every subcarrier.
pub fn pdp_constant(cfg: &ChannelConfig) -> f64 {
    let total: f64 = (0..cfg.num_taps).map(|n| tap_decay(n, cfg.decay_factor)).sum();
    1.0 / total
}

/// Expected power of each tap, `σ_c² e^{−nΞ}`.
pub fn tap_powers(cfg: &ChannelConfig) -> Vec<f64> {
    let c = pdp_constant(cfg);
    (0..cfg.num_taps)
        .map(|n| c * tap_decay(n, cfg.decay_factor))
        .collect()
}

fn tap_decay(n: usize, decay: f64) -> f64 {
    // n = 0 is special-cased so an infinite decay factor leaves one unit tap.
    if n == 0 {
        1.0
    } else {
        math::exp(-(n as f64) * decay)
    }
}

/// Draws independent zero-mean circularly-symmetric Gaussian taps with the
/// exponential profile and transforms them onto the subcarrier grid.
pub fn draw_realization<R: Rng + ?Sized>(
    channel: &ChannelConfig,
    ofdm: &OfdmConfig,
    rng: &mut R,
) -> ChannelRealization {
    let taps = tap_powers(channel)
        .into_iter()
        .map(|p| complex_gaussian(rng, p))
        .collect();
    ChannelRealization::from_taps(taps, ofdm.num_subcarriers)
}
