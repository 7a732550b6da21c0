//! System parameters.
//!
//! A [`SystemConfig`] is assembled from primary fields (the ones a user sets)
//! and then passed through [`SystemConfig::validate`], which checks every
//! invariant and fills in the derived quantities (subcarrier spacing, sample
//! period, NB symbol period, ...). Derived fields present before validation
//! are ignored and overwritten.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::math;

/// OFDM secondary-user parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfdmConfig {
    pub bandwidth_hz: f64,
    pub num_subcarriers: usize,
    /// Transmit window roll-off. Only 0 is modeled.
    pub window_rolloff: f64,
    /// Cyclic prefix length as a fraction of the useful symbol duration.
    pub cp_fraction: f64,
    pub postfix_s: f64,
    // derived
    pub subcarrier_spacing_hz: f64,
    pub useful_symbol_s: f64,
    pub sample_period_s: f64,
}

impl OfdmConfig {
    /// Throughput loss from the cyclic prefix, `T_u / (T_u + T_cp + T_p)`.
    pub fn cp_loss_factor(&self) -> f64 {
        let tu = self.useful_symbol_s;
        tu / (tu + self.cp_fraction * tu + self.postfix_s)
    }

    pub fn cp_duration_s(&self) -> f64 {
        self.cp_fraction * self.useful_symbol_s
    }
}

/// Averaging used when evaluating the analytic interference variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Averaging {
    /// Number of consecutive OFDM blocks averaged in place of the limit over blocks.
    pub num_blocks: usize,
    /// Number of uniformly drawn interferer delays averaged over.
    pub num_delays: usize,
}

impl Default for Averaging {
    fn default() -> Self {
        Averaging {
            num_blocks: 64,
            num_delays: 32,
        }
    }
}

/// Narrowband primary-user parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NbConfig {
    pub bandwidth_hz: f64,
    pub rolloff: f64,
    /// Carrier offset from the OFDM carrier in units of the OFDM bandwidth.
    pub normalized_freq: f64,
    /// Truncation half-width of the RRC pulse, in NB symbols.
    pub pulse_span_symbols: usize,
    pub averaging: Averaging,
    /// Redraw the interferer delay for every trial instead of using the
    /// delay-averaged profile.
    pub per_trial_delay: bool,
    // derived
    pub symbol_period_s: f64,
}

impl NbConfig {
    /// Carrier offset `f_c` in hertz.
    pub fn carrier_offset_hz(&self, ofdm: &OfdmConfig) -> f64 {
        self.normalized_freq * ofdm.bandwidth_hz
    }
}

/// Frequency-selective channel parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub num_taps: usize,
    pub decay_factor: f64,
    pub num_realizations: usize,
}

/// Per-link operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkConfig {
    pub avg_snr_db: f64,
    pub sir_db: f64,
    /// Channel-estimation error variance `σ_h²`.
    pub est_error_var: f64,
    pub target_ber: f64,
    /// Uniform transmit symbol power per subcarrier.
    pub symbol_power: f64,
}

impl LinkConfig {
    /// Noise variance given unit average channel gain: `σ_s² · 10^(−SNR/10)`.
    pub fn noise_var(&self) -> f64 {
        self.symbol_power * math::db_to_linear(-self.avg_snr_db)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub ofdm: OfdmConfig,
    pub nb: NbConfig,
    pub channel: ChannelConfig,
    pub link: LinkConfig,
}

impl SystemConfig {
    /// The reference parameter set: 1.25 MHz / 128-subcarrier OFDM with a
    /// quarter-symbol CP, a 15 kHz RRC (α = 0.35) QPSK interferer at
    /// `F_n = 0.52`, a 5-tap channel with decay 1/5, and `BER_T = 1e-4`.
    pub fn reference() -> SystemConfig {
        SystemConfig {
            ofdm: OfdmConfig {
                bandwidth_hz: 1.25e6,
                num_subcarriers: 128,
                window_rolloff: 0.0,
                cp_fraction: 0.25,
                postfix_s: 0.0,
                subcarrier_spacing_hz: 0.0,
                useful_symbol_s: 0.0,
                sample_period_s: 0.0,
            },
            nb: NbConfig {
                bandwidth_hz: 15e3,
                rolloff: 0.35,
                normalized_freq: 0.52,
                pulse_span_symbols: 16,
                averaging: Averaging::default(),
                per_trial_delay: false,
                symbol_period_s: 0.0,
            },
            channel: ChannelConfig {
                num_taps: 5,
                decay_factor: 0.2,
                num_realizations: 10_000,
            },
            link: LinkConfig {
                avg_snr_db: 20.0,
                sir_db: 0.0,
                est_error_var: 0.0,
                target_ber: 1e-4,
                symbol_power: 1.0,
            },
        }
        .validate()
        .expect("reference parameters are valid")
    }

    /// Checks every invariant and recomputes the derived fields.
    pub fn validate(mut self) -> Result<SystemConfig> {
        let o = &mut self.ofdm;
        positive_finite("ofdm.bandwidth_hz", o.bandwidth_hz)?;
        if o.num_subcarriers == 0 {
            return Err(invalid("ofdm.num_subcarriers", "must be at least 1"));
        }
        if !(0.0..=1.0).contains(&o.window_rolloff) {
            return Err(invalid("ofdm.window_rolloff", "must lie in [0, 1]"));
        }
        if o.window_rolloff != 0.0 {
            return Err(Error::NotSupported("transmit windowing (ofdm.window_rolloff > 0)"));
        }
        non_negative_finite("ofdm.cp_fraction", o.cp_fraction)?;
        non_negative_finite("ofdm.postfix_s", o.postfix_s)?;
        o.subcarrier_spacing_hz = o.bandwidth_hz / o.num_subcarriers as f64;
        o.useful_symbol_s = 1.0 / o.subcarrier_spacing_hz;
        o.sample_period_s = 1.0 / o.bandwidth_hz;

        let nb = &mut self.nb;
        positive_finite("nb.bandwidth_hz", nb.bandwidth_hz)?;
        if !(0.0..=1.0).contains(&nb.rolloff) {
            return Err(invalid("nb.rolloff", "must lie in [0, 1]"));
        }
        non_negative_finite("nb.normalized_freq", nb.normalized_freq)?;
        if nb.pulse_span_symbols == 0 {
            return Err(invalid("nb.pulse_span_symbols", "must be at least 1"));
        }
        if nb.averaging.num_blocks == 0 {
            return Err(invalid("nb.avg_blocks", "must be at least 1"));
        }
        if nb.averaging.num_delays == 0 {
            return Err(invalid("nb.avg_delays", "must be at least 1"));
        }
        nb.symbol_period_s = (1.0 + nb.rolloff) / nb.bandwidth_hz;

        let ch = &self.channel;
        if ch.num_taps == 0 {
            return Err(invalid("channel.num_taps", "must be at least 1"));
        }
        if ch.decay_factor.is_nan() || ch.decay_factor <= 0.0 {
            return Err(invalid("channel.decay_factor", "must be positive"));
        }
        if ch.num_realizations == 0 {
            return Err(invalid("channel.num_realizations", "must be at least 1"));
        }

        let l = &self.link;
        if !l.avg_snr_db.is_finite() {
            return Err(invalid("link.avg_snr_db", "must be finite"));
        }
        if !l.sir_db.is_finite() {
            return Err(invalid("link.sir_db", "must be finite"));
        }
        non_negative_finite("link.est_error_var", l.est_error_var)?;
        if !(l.target_ber > 0.0 && l.target_ber < 0.5) {
            return Err(invalid("link.target_ber", "must lie in (0, 0.5)"));
        }
        positive_finite("link.symbol_power", l.symbol_power)?;
        Ok(self)
    }
}

fn positive_finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, "must be positive and finite"))
    }
}

fn non_negative_finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(invalid(name, "must be non-negative and finite"))
    }
}
