//! Per-subcarrier SINR and closed-form bit error rates.

use core::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;

/// Constellations available to the allocator, in increasing order of size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Constellation {
    Null,
    Bpsk,
    Qpsk,
    Qam16,
    Qam64,
}

impl Constellation {
    pub const ALL: [Constellation; 5] = [
        Constellation::Null,
        Constellation::Bpsk,
        Constellation::Qpsk,
        Constellation::Qam16,
        Constellation::Qam64,
    ];

    /// Bits per symbol `m_k`.
    pub const fn bits(self) -> u32 {
        match self {
            Constellation::Null => 0,
            Constellation::Bpsk => 1,
            Constellation::Qpsk => 2,
            Constellation::Qam16 => 4,
            Constellation::Qam64 => 6,
        }
    }

    /// Constellation size `M_k = 2^{m_k}`.
    pub const fn size(self) -> u32 {
        1 << self.bits()
    }

    pub const fn is_active(self) -> bool {
        !matches!(self, Constellation::Null)
    }

    /// One step down the ladder 64-QAM → 16-QAM → QPSK → BPSK → Null.
    /// `Null` stays `Null`.
    pub const fn reduce(self) -> Constellation {
        match self {
            Constellation::Qam64 => Constellation::Qam16,
            Constellation::Qam16 => Constellation::Qpsk,
            Constellation::Qpsk => Constellation::Bpsk,
            Constellation::Bpsk | Constellation::Null => Constellation::Null,
        }
    }

    pub const fn name(self) -> &'static str {
        match self {
            Constellation::Null => "null",
            Constellation::Bpsk => "bpsk",
            Constellation::Qpsk => "qpsk",
            Constellation::Qam16 => "16qam",
            Constellation::Qam64 => "64qam",
        }
    }
}

/// Channel state seen by the allocator on one subcarrier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubcarrierLink {
    pub index: usize,
    pub gain_sq: f64,
    /// Linear SINR `γ_k`.
    pub sinr: f64,
}

/// `γ = σ_s² |H|² / (σ_n² + σ_h² + σ_I²)`.
///
/// The estimation-error and interference variances are added first, so
/// swapping their values gives bit-identical results.
pub fn sinr(
    gain_sq: f64,
    symbol_power: f64,
    noise_var: f64,
    est_error_var: f64,
    interference_var: f64,
) -> Result<f64> {
    if gain_sq < 0.0 || symbol_power < 0.0 || noise_var < 0.0 || est_error_var < 0.0 || interference_var < 0.0 {
        return Err(Error::Domain("SINR inputs must be non-negative"));
    }
    let denom = noise_var + (est_error_var + interference_var);
    if !(denom > 0.0) {
        return Err(Error::Domain("SINR denominator is zero"));
    }
    Ok(symbol_power * gain_sq / denom)
}

/// Gaussian tail probability `Q(x) = ½ erfc(x/√2)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * math::erfc(x / SQRT_2)
}

/// Bit error rate of `constellation` at linear SINR `sinr`, with the cyclic
/// prefix loss `cp_loss = T_u/T_o` applied to the SINR.
///
/// BPSK and QPSK share `Q(√(2·cp·γ))`; square 16/64-QAM use
/// `(4/m)(1−1/√M) Q(√(3cpγ/(M−1))) (1 − (1−1/√M) Q(√(3cpγ/(M−1))))`.
pub fn ber(constellation: Constellation, sinr: f64, cp_loss: f64) -> Result<f64> {
    let eff = cp_loss * sinr;
    match constellation {
        Constellation::Null => Err(Error::Domain("BER of a nulled subcarrier is undefined")),
        Constellation::Bpsk | Constellation::Qpsk => Ok(q_function(math::sqrt(2.0 * eff))),
        Constellation::Qam16 | Constellation::Qam64 => {
            let m = constellation.bits() as f64;
            let size = constellation.size() as f64;
            let a = 1.0 - 1.0 / math::sqrt(size);
            let q = q_function(math::sqrt(3.0 / (size - 1.0) * eff));
            Ok(4.0 / m * a * q * (1.0 - a * q))
        }
    }
}
