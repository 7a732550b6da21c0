//! Flat `key = value` config files.
//!
//! Blank lines and lines starting with `#` are ignored. Keys mirror the
//! config struct fields (`ofdm.num_subcarriers`, `link.target_ber`, ...).
//! Keys absent from a file keep their reference defaults; unknown or
//! repeated keys are errors.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use ofdm_bitload_core::config::SystemConfig;

use crate::error::{Result, SimError};

/// Every recognized key, in file order.
pub const KEYS: &[&str] = &[
    "ofdm.bandwidth_hz",
    "ofdm.num_subcarriers",
    "ofdm.window_rolloff",
    "ofdm.cp_fraction",
    "ofdm.postfix_s",
    "nb.bandwidth_hz",
    "nb.rolloff",
    "nb.normalized_freq",
    "nb.pulse_span_symbols",
    "nb.avg_blocks",
    "nb.avg_delays",
    "nb.per_trial_delay",
    "channel.num_taps",
    "channel.decay_factor",
    "channel.num_realizations",
    "link.avg_snr_db",
    "link.sir_db",
    "link.est_error_var",
    "link.target_ber",
    "link.symbol_power",
];

fn parse_value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| SimError::Config(format!("`{key}`: cannot parse `{raw}`")))
}

/// Sets one key on `cfg` (without validating).
pub fn set_key(cfg: &mut SystemConfig, key: &str, raw: &str) -> Result<()> {
    let raw = raw.trim();
    match key {
        "ofdm.bandwidth_hz" => cfg.ofdm.bandwidth_hz = parse_value(key, raw)?,
        "ofdm.num_subcarriers" => cfg.ofdm.num_subcarriers = parse_value(key, raw)?,
        "ofdm.window_rolloff" => cfg.ofdm.window_rolloff = parse_value(key, raw)?,
        "ofdm.cp_fraction" => cfg.ofdm.cp_fraction = parse_value(key, raw)?,
        "ofdm.postfix_s" => cfg.ofdm.postfix_s = parse_value(key, raw)?,
        "nb.bandwidth_hz" => cfg.nb.bandwidth_hz = parse_value(key, raw)?,
        "nb.rolloff" => cfg.nb.rolloff = parse_value(key, raw)?,
        "nb.normalized_freq" => cfg.nb.normalized_freq = parse_value(key, raw)?,
        "nb.pulse_span_symbols" => cfg.nb.pulse_span_symbols = parse_value(key, raw)?,
        "nb.avg_blocks" => cfg.nb.averaging.num_blocks = parse_value(key, raw)?,
        "nb.avg_delays" => cfg.nb.averaging.num_delays = parse_value(key, raw)?,
        "nb.per_trial_delay" => cfg.nb.per_trial_delay = parse_value(key, raw)?,
        "channel.num_taps" => cfg.channel.num_taps = parse_value(key, raw)?,
        "channel.decay_factor" => cfg.channel.decay_factor = parse_value(key, raw)?,
        "channel.num_realizations" => cfg.channel.num_realizations = parse_value(key, raw)?,
        "link.avg_snr_db" => cfg.link.avg_snr_db = parse_value(key, raw)?,
        "link.sir_db" => cfg.link.sir_db = parse_value(key, raw)?,
        "link.est_error_var" => cfg.link.est_error_var = parse_value(key, raw)?,
        "link.target_ber" => cfg.link.target_ber = parse_value(key, raw)?,
        "link.symbol_power" => cfg.link.symbol_power = parse_value(key, raw)?,
        _ => return Err(SimError::Config(format!("unknown key `{key}`"))),
    }
    Ok(())
}

/// Parses config text on top of the reference defaults and validates it.
pub fn parse(text: &str) -> Result<SystemConfig> {
    let mut cfg = SystemConfig::reference();
    let mut seen = BTreeSet::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(SimError::Config(format!("line {}: expected `key = value`", lineno + 1)));
        };
        let key = key.trim();
        if !seen.insert(key.to_owned()) {
            return Err(SimError::Config(format!("line {}: duplicate key `{key}`", lineno + 1)));
        }
        set_key(&mut cfg, key, value)
            .map_err(|e| SimError::Config(format!("line {}: {}", lineno + 1, strip(e))))?;
    }
    validate(cfg)
}

fn strip(e: SimError) -> String {
    match e {
        SimError::Config(s) => s,
        other => other.to_string(),
    }
}

/// Validation failures surface as config errors.
pub fn validate(cfg: SystemConfig) -> Result<SystemConfig> {
    cfg.validate().map_err(|e| SimError::Config(e.to_string()))
}

pub fn load(path: &Path) -> Result<SystemConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| SimError::io(path, e))?;
    parse(&text).map_err(|e| SimError::Config(format!("{}: {}", path.display(), strip(e))))
}

/// Writes every primary key. Floats use the shortest round-trip form, so
/// `parse(&serialize(c))` reproduces `c` exactly.
pub fn serialize(cfg: &SystemConfig) -> String {
    let mut out = String::new();
    let mut put = |k: &str, v: String| {
        let _ = writeln!(out, "{k} = {v}");
    };
    put("ofdm.bandwidth_hz", cfg.ofdm.bandwidth_hz.to_string());
    put("ofdm.num_subcarriers", cfg.ofdm.num_subcarriers.to_string());
    put("ofdm.window_rolloff", cfg.ofdm.window_rolloff.to_string());
    put("ofdm.cp_fraction", cfg.ofdm.cp_fraction.to_string());
    put("ofdm.postfix_s", cfg.ofdm.postfix_s.to_string());
    put("nb.bandwidth_hz", cfg.nb.bandwidth_hz.to_string());
    put("nb.rolloff", cfg.nb.rolloff.to_string());
    put("nb.normalized_freq", cfg.nb.normalized_freq.to_string());
    put("nb.pulse_span_symbols", cfg.nb.pulse_span_symbols.to_string());
    put("nb.avg_blocks", cfg.nb.averaging.num_blocks.to_string());
    put("nb.avg_delays", cfg.nb.averaging.num_delays.to_string());
    put("nb.per_trial_delay", cfg.nb.per_trial_delay.to_string());
    put("channel.num_taps", cfg.channel.num_taps.to_string());
    put("channel.decay_factor", cfg.channel.decay_factor.to_string());
    put("channel.num_realizations", cfg.channel.num_realizations.to_string());
    put("link.avg_snr_db", cfg.link.avg_snr_db.to_string());
    put("link.sir_db", cfg.link.sir_db.to_string());
    put("link.est_error_var", cfg.link.est_error_var.to_string());
    put("link.target_ber", cfg.link.target_ber.to_string());
    put("link.symbol_power", cfg.link.symbol_power.to_string());
    out
}
