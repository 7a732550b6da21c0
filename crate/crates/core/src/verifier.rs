//! Symbol-level BER measurement.
//!
//! Bits are Gray-mapped, sent through the modeled impairments, sliced with
//! hard decisions and counted. This checks the closed forms in
//! [`crate::link`] and the allocator's mean-BER guarantee against an actual
//! transmission.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::allocator::{AllocationResult, AllocationStatus};
use crate::channel::ChannelRealization;
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::interference::{InterferenceProfile, NbSampler};
use crate::link::{self, Constellation};
use crate::math;
use crate::modem;
use crate::rng::complex_gaussian;

/// Expected error count below which a measurement is refused.
pub const MIN_EXPECTED_ERRORS: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalBer {
    pub subcarrier: usize,
    pub constellation: Constellation,
    pub bits_sent: u64,
    pub bit_errors: u64,
    pub measured_ber: f64,
    pub predicted_ber: f64,
}

impl EmpiricalBer {
    fn new(subcarrier: usize, constellation: Constellation, bits_sent: u64, bit_errors: u64, predicted_ber: f64) -> Self {
        EmpiricalBer {
            subcarrier,
            constellation,
            bits_sent,
            bit_errors,
            measured_ber: bit_errors as f64 / bits_sent.max(1) as f64,
            predicted_ber,
        }
    }

    /// Binomial standard deviation of the measured rate under the prediction.
    pub fn binomial_sigma(&self) -> f64 {
        let p = self.predicted_ber;
        math::sqrt(p * (1.0 - p) / self.bits_sent as f64)
    }

    /// `|measured − predicted|` in binomial standard deviations.
    pub fn deviation_sigmas(&self) -> f64 {
        math::abs(self.measured_ber - self.predicted_ber) / self.binomial_sigma()
    }
}

/// Bits needed for `min_errors` expected errors at `predicted_ber`.
pub fn required_bits(predicted_ber: f64, min_errors: f64) -> f64 {
    math::ceil(min_errors / predicted_ber)
}

/// Sends `num_bits` (rounded up to whole symbols) over an AWGN channel at
/// effective SNR `cp_loss · sinr` and counts hard-decision bit errors.
pub fn measure_ber<R: Rng + ?Sized>(
    constellation: Constellation,
    sinr: f64,
    cp_loss: f64,
    num_bits: u64,
    rng: &mut R,
) -> Result<EmpiricalBer> {
    let predicted = link::ber(constellation, sinr, cp_loss)?;
    if !(sinr >= 0.0) {
        return Err(Error::Domain("SINR must be non-negative"));
    }
    if (num_bits as f64) * predicted < MIN_EXPECTED_ERRORS {
        return Err(Error::Domain("too few bits for 100 expected errors at the predicted BER"));
    }
    let m = constellation.bits() as u64;
    let symbols = num_bits.div_ceil(m);
    let amp = math::sqrt(cp_loss * sinr);
    let mask = (1u32 << m) - 1;
    let mut errors = 0u64;
    for _ in 0..symbols {
        let bits = rng.random::<u32>() & mask;
        let r = modem::modulate(constellation, bits) * amp + complex_gaussian(rng, 1.0);
        errors += (modem::demodulate(constellation, r, amp) ^ bits).count_ones() as u64;
    }
    Ok(EmpiricalBer::new(0, constellation, symbols * m, errors, predicted))
}

/// Totals of a full-allocation transmission.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationCheck {
    pub per_subcarrier: Vec<EmpiricalBer>,
    pub bits_sent: u64,
    pub bit_errors: u64,
    /// Bit-weighted empirical mean BER.
    pub mean_measured_ber: f64,
    pub mean_predicted_ber: f64,
}

impl AllocationCheck {
    fn from_counts(per_subcarrier: Vec<EmpiricalBer>, mean_predicted_ber: f64) -> Self {
        let bits_sent = per_subcarrier.iter().map(|e| e.bits_sent).sum();
        let bit_errors = per_subcarrier.iter().map(|e| e.bit_errors).sum();
        AllocationCheck {
            per_subcarrier,
            bits_sent,
            bit_errors,
            mean_measured_ber: bit_errors as f64 / bits_sent as f64,
            mean_predicted_ber,
        }
    }

    /// Binomial standard deviation of the mean estimate under the prediction.
    pub fn binomial_sigma(&self) -> f64 {
        let p = self.mean_predicted_ber;
        math::sqrt(p * (1.0 - p) / self.bits_sent as f64)
    }
}

fn require_met(result: &AllocationResult) -> Result<f64> {
    match (result.status, result.mean_ber) {
        (AllocationStatus::Met, Some(m)) if result.throughput_bits > 0 => Ok(m),
        _ => Err(Error::Domain("verification needs an allocation that met its target")),
    }
}

/// Sends `num_ofdm_symbols` symbols with the given loads, each subcarrier
/// seen as AWGN at effective SNR `cp_loss · sinrs[k]`.
pub fn verify_loads<R: Rng + ?Sized>(
    result: &AllocationResult,
    sinrs: &[f64],
    cp_loss: f64,
    num_ofdm_symbols: u64,
    rng: &mut R,
) -> Result<AllocationCheck> {
    let mean_pred = require_met(result)?;
    if sinrs.len() != result.loads.len() {
        return Err(Error::Domain("SINR vector and allocation differ in length"));
    }
    let active: Vec<usize> = (0..sinrs.len()).filter(|&k| result.loads[k].is_active()).collect();
    let amps: Vec<f64> = sinrs.iter().map(|g| math::sqrt(cp_loss * g)).collect();
    let mut errors = vec![0u64; sinrs.len()];
    for _ in 0..num_ofdm_symbols {
        for &k in &active {
            let c = result.loads[k];
            let bits = rng.random::<u32>() & ((1 << c.bits()) - 1);
            let r = modem::modulate(c, bits) * amps[k] + complex_gaussian(rng, 1.0);
            errors[k] += (modem::demodulate(c, r, amps[k]) ^ bits).count_ones() as u64;
        }
    }
    let per = active
        .iter()
        .map(|&k| {
            let c = result.loads[k];
            EmpiricalBer::new(k, c, num_ofdm_symbols * c.bits() as u64, errors[k], result.per_ber[k].unwrap_or(0.0))
        })
        .collect();
    Ok(AllocationCheck::from_counts(per, mean_pred))
}

/// Transmits `num_ofdm_symbols` OFDM symbols with the allocated loads over
/// `realization`. Each active subcarrier receives `H_k X_k + G_k` with
/// `G_k ~ CN(0, (σ_n² + σ_h² + σ²_{I,k}) / cp)`, is divided by `H_k` and
/// sliced.
pub fn verify_allocation<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    realization: &ChannelRealization,
    profile: &InterferenceProfile,
    result: &AllocationResult,
    num_ofdm_symbols: u64,
    rng: &mut R,
) -> Result<AllocationCheck> {
    transmit(cfg, realization, profile, None, result, num_ofdm_symbols, rng)
}

/// Like [`verify_allocation`], but the interference term is the FFT of an
/// actually synthesized narrowband waveform with symbol power `sigma_b2`
/// instead of a Gaussian of variance `σ²_{I,k}`. The difference between the
/// two measurements shows how far the Gaussian-interference premise is off.
pub fn verify_allocation_with_nb<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    realization: &ChannelRealization,
    profile: &InterferenceProfile,
    sigma_b2: f64,
    result: &AllocationResult,
    num_ofdm_symbols: u64,
    rng: &mut R,
) -> Result<AllocationCheck> {
    transmit(cfg, realization, profile, Some(sigma_b2), result, num_ofdm_symbols, rng)
}

fn transmit<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    realization: &ChannelRealization,
    profile: &InterferenceProfile,
    nb_power: Option<f64>,
    result: &AllocationResult,
    num_ofdm_symbols: u64,
    rng: &mut R,
) -> Result<AllocationCheck> {
    let mean_pred = require_met(result)?;
    let n = cfg.ofdm.num_subcarriers;
    if realization.num_subcarriers() != n || result.loads.len() != n || profile.len() != n {
        return Err(Error::Domain("realization, profile and allocation must cover every subcarrier"));
    }
    if num_ofdm_symbols == 0 {
        return Err(Error::Domain("need at least one OFDM symbol"));
    }
    let cp = cfg.ofdm.cp_loss_factor();
    let link = &cfg.link;
    let tx_amp = math::sqrt(link.symbol_power);
    let gaussian_var: Vec<f64> = profile
        .variances
        .iter()
        .map(|&vi| {
            let lumped = if nb_power.is_some() { 0.0 } else { vi };
            (link.noise_var() + (link.est_error_var + lumped)) / cp
        })
        .collect();
    let nb_scale = 1.0 / math::sqrt(cp);
    let mut sampler = nb_power.map(|_| NbSampler::new(cfg));
    let mut nb = vec![Complex64::new(0.0, 0.0); n];
    let mut errors = vec![0u64; n];

    for sym in 0..num_ofdm_symbols {
        if let (Some(s), Some(p)) = (sampler.as_mut(), nb_power) {
            s.synthesize_block(sym, p, rng, &mut nb);
        }
        for k in 0..n {
            let c = result.loads[k];
            if !c.is_active() {
                continue;
            }
            let h = realization.freq_response[k];
            let bits = rng.random::<u32>() & ((1 << c.bits()) - 1);
            let x = modem::modulate(c, bits) * tx_amp;
            let mut g = complex_gaussian(rng, gaussian_var[k]);
            if nb_power.is_some() {
                g += nb[k] * nb_scale;
            }
            let y = (h * x + g) / (h * tx_amp);
            errors[k] += (modem::demodulate(c, y, 1.0) ^ bits).count_ones() as u64;
        }
    }
    let per = (0..n)
        .filter(|&k| result.loads[k].is_active())
        .map(|k| {
            let c = result.loads[k];
            EmpiricalBer::new(k, c, num_ofdm_symbols * c.bits() as u64, errors[k], result.per_ber[k].unwrap_or(0.0))
        })
        .collect();
    Ok(AllocationCheck::from_counts(per, mean_pred))
}
