//! One Monte Carlo allocation instance.

use alloc::vec::Vec;

use rand::Rng;

use crate::allocator::{allocate, AllocationResult};
use crate::channel::{draw_realization, ChannelRealization};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::interference::{analytic_variance_for_delays, InterferenceProfile};
use crate::link::{sinr, SubcarrierLink};
use crate::rng::{trial_rng, StreamRng};

/// Per-subcarrier SINR for one channel and interference profile.
pub fn build_links(
    cfg: &SystemConfig,
    realization: &ChannelRealization,
    profile: &InterferenceProfile,
) -> Result<Vec<SubcarrierLink>> {
    if realization.num_subcarriers() != profile.len() {
        return Err(Error::Domain("channel and interference profile differ in length"));
    }
    let l = &cfg.link;
    let noise = l.noise_var();
    realization
        .gains_sq
        .iter()
        .zip(&profile.variances)
        .enumerate()
        .map(|(index, (&gain_sq, &vi))| {
            Ok(SubcarrierLink {
                index,
                gain_sq,
                sinr: sinr(gain_sq, l.symbol_power, noise, l.est_error_var, vi)?,
            })
        })
        .collect()
}

/// Channel drawn by trial `trial_index`. The trial's generator is returned
/// positioned after the channel draw.
pub fn trial_channel(cfg: &SystemConfig, base_seed: u64, trial_index: u64) -> (ChannelRealization, StreamRng) {
    let mut rng = trial_rng(base_seed, trial_index);
    let ch = draw_realization(&cfg.channel, &cfg.ofdm, &mut rng);
    (ch, rng)
}

/// Draws the trial's channel and allocates against `profile`.
pub fn run_trial(
    cfg: &SystemConfig,
    profile: &InterferenceProfile,
    base_seed: u64,
    trial_index: u64,
) -> Result<AllocationResult> {
    let (ch, _) = trial_channel(cfg, base_seed, trial_index);
    let links = build_links(cfg, &ch, profile)?;
    Ok(allocate(&links, cfg.link.target_ber, cfg.ofdm.cp_loss_factor()))
}

/// Variant that draws its own interferer delay after the channel and uses
/// the single-delay analytic profile at symbol power `sigma_b2`.
pub fn run_trial_with_delay(
    cfg: &SystemConfig,
    sigma_b2: f64,
    base_seed: u64,
    trial_index: u64,
) -> Result<AllocationResult> {
    let (ch, mut rng) = trial_channel(cfg, base_seed, trial_index);
    let delay = rng.random::<f64>() * cfg.nb.symbol_period_s;
    let profile = analytic_variance_for_delays(cfg, sigma_b2, cfg.nb.averaging.num_blocks, &[delay])?;
    let links = build_links(cfg, &ch, &profile)?;
    Ok(allocate(&links, cfg.link.target_ber, cfg.ofdm.cp_loss_factor()))
}
