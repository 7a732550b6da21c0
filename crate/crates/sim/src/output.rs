//! CSV and JSON artifacts.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use ofdm_bitload_core::allocator::TraceStep;
use ofdm_bitload_core::channel::ChannelRealization;
use ofdm_bitload_core::interference::InterferenceProfile;
use ofdm_bitload_core::verifier::EmpiricalBer;
use serde::Serialize;

use crate::error::{Result, SimError};
use crate::experiments::SweepRecord;

pub const SWEEP_HEADER: &str = "x,avg_throughput_bits,stderr_bits,stopped_fraction,trials,seed";

pub fn sweep_csv(records: &[SweepRecord]) -> String {
    let mut s = String::from(SWEEP_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            r.x, r.avg_throughput_bits, r.stderr_bits, r.stopped_fraction, r.trials, r.seed
        );
    }
    s
}

/// `k,variance_analytic[,variance_mc]`.
pub fn profile_csv(analytic: &InterferenceProfile, mc: Option<&InterferenceProfile>) -> String {
    let mut s = String::from(if mc.is_some() {
        "k,variance_analytic,variance_mc\n"
    } else {
        "k,variance_analytic\n"
    });
    for (k, a) in analytic.variances.iter().enumerate() {
        match mc {
            Some(m) => {
                let _ = writeln!(s, "{k},{a},{}", m.variances[k]);
            }
            None => {
                let _ = writeln!(s, "{k},{a}");
            }
        }
    }
    s
}

pub fn taps_csv(r: &ChannelRealization) -> String {
    let mut s = String::from("tap_index,re,im\n");
    for (i, h) in r.taps.iter().enumerate() {
        let _ = writeln!(s, "{i},{},{}", h.re, h.im);
    }
    s
}

pub fn gains_csv(r: &ChannelRealization) -> String {
    let mut s = String::from("k,gain_sq\n");
    for (k, g) in r.gains_sq.iter().enumerate() {
        let _ = writeln!(s, "{k},{g}");
    }
    s
}

pub fn trace_csv(trace: &[TraceStep]) -> String {
    let mut s = String::from("iteration,victim,constellation,mean_ber\n");
    for t in trace {
        let mean = t.mean_ber.map(|m| m.to_string()).unwrap_or_default();
        let _ = writeln!(s, "{},{},{},{}", t.iteration, t.victim, t.constellation.name(), mean);
    }
    s
}

pub fn verify_csv(rows: &[EmpiricalBer]) -> String {
    let mut s = String::from("k,constellation,predicted_ber,measured_ber,bits_sent\n");
    for e in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            e.subcarrier,
            e.constellation.name(),
            e.predicted_ber,
            e.measured_ber,
            e.bits_sent
        );
    }
    s
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory and an atomic rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| SimError::io(&dir, e))?;
    tmp.write_all(contents).map_err(|e| SimError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| SimError::io(path, e))?;
    tmp.persist(path).map_err(|e| SimError::io(path, e.error))?;
    Ok(())
}

/// `out.csv` → `out.json`; paths without an extension get `.json` appended.
pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("json")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| SimError::Config(format!("cannot serialize {}: {e}", path.display())))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}
