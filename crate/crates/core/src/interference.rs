//! Narrowband interferer as seen on the OFDM subcarriers.
//!
//! The primary user transmits `I(t) = Σ_l b_l p(t − lT − ξ) e^{j2π f_c t}`.
//! The OFDM receiver samples it at `T_s = 1/BW`, cuts blocks of `N` samples
//! (`v = n + rN`, cyclic prefix ignored) and applies a `1/√N`-normalized FFT.
//! With i.i.d. zero-mean symbols of power `σ_b²`, block `r` at delay `ξ` has
//!
//! ```text
//! σ²_k(r, ξ) = σ_b²/N · Σ_l | Σ_n p((n+rN)T_s − lT − ξ) e^{j2π F_n n} e^{−j2πkn/N} |²
//! ```
//!
//! which is the double sum over `n, n'` folded into a squared magnitude. The
//! analytic profile averages this over `num_blocks` consecutive blocks and
//! `num_delays` uniform delays; the Monte Carlo estimator synthesizes the
//! waveform from random QPSK symbols and averages `|Z_k|²` directly.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{Averaging, SystemConfig};
use crate::dft::Fft;
use crate::error::{Error, Result};
use crate::math;
use crate::pulse::RrcPulse;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileMethod {
    Analytic,
    MonteCarlo,
    /// Same variance on every subcarrier; used for model checks.
    Flat,
}

/// Per-subcarrier interference variance `σ²_{I,k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferenceProfile {
    pub variances: Vec<f64>,
    pub symbol_power: f64,
    pub normalized_freq: f64,
    pub method: ProfileMethod,
}

impl InterferenceProfile {
    /// Profile with `variance` on each of `n` subcarriers.
    pub fn flat(n: usize, variance: f64) -> InterferenceProfile {
        InterferenceProfile {
            variances: vec![variance; n],
            symbol_power: 0.0,
            normalized_freq: 0.0,
            method: ProfileMethod::Flat,
        }
    }

    pub fn len(&self) -> usize {
        self.variances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variances.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.variances.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.total() / self.variances.len() as f64
    }

    pub fn peak(&self) -> f64 {
        self.variances.iter().copied().fold(0.0, f64::max)
    }

    /// Index of the largest variance (lowest index on ties).
    pub fn peak_index(&self) -> usize {
        let mut best = 0;
        for (k, &v) in self.variances.iter().enumerate() {
            if v > self.variances[best] {
                best = k;
            }
        }
        best
    }

    /// The profile for symbol power `sigma_b2`, given that `self` was
    /// computed at unit symbol power.
    pub fn rescaled(&self, sigma_b2: f64) -> InterferenceProfile {
        InterferenceProfile {
            variances: self.variances.iter().map(|v| sigma_b2 * v).collect(),
            symbol_power: sigma_b2,
            normalized_freq: self.normalized_freq,
            method: self.method,
        }
    }
}

/// Sampling geometry shared by the analytic and Monte Carlo paths.
#[derive(Debug, Clone)]
pub struct NbSampler {
    pulse: RrcPulse,
    n: usize,
    sample_period: f64,
    symbol_period: f64,
    /// `F_n` reduced modulo 1.
    freq: f64,
    /// `e^{j2π F_n n}` for `n = 0..N`.
    phasor: Vec<Complex64>,
    fft: Fft,
    row: Vec<f64>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl NbSampler {
    pub fn new(cfg: &SystemConfig) -> NbSampler {
        let n = cfg.ofdm.num_subcarriers;
        // e^{j2π F n} only depends on F mod 1 for integer n.
        let f = cfg.nb.normalized_freq;
        let freq = f - math::floor(f);
        let phasor = (0..n).map(|i| unit_phasor(freq * i as f64)).collect();
        NbSampler {
            pulse: RrcPulse::from_config(&cfg.nb),
            n,
            sample_period: cfg.ofdm.sample_period_s,
            symbol_period: cfg.nb.symbol_period_s,
            freq,
            phasor,
            fft: Fft::new(n),
            row: vec![0.0; n],
            buf: vec![Complex64::new(0.0, 0.0); n],
            scratch: Vec::new(),
        }
    }

    pub fn num_subcarriers(&self) -> usize {
        self.n
    }

    pub fn symbol_period_s(&self) -> f64 {
        self.symbol_period
    }

    fn block_start(&self, block: u64) -> f64 {
        (block as f64) * (self.n as f64) * self.sample_period
    }

    /// Symbol indices `l` whose truncated pulse touches block `block` at delay `delay`.
    fn symbol_range(&self, block: u64, delay: f64) -> (i64, i64) {
        let w = self.pulse.half_width_s();
        let start = self.block_start(block) - delay;
        let end = start + (self.n as f64 - 1.0) * self.sample_period;
        let lo = math::ceil((start - w) / self.symbol_period) as i64;
        let hi = math::floor((end + w) / self.symbol_period) as i64;
        (lo, hi)
    }

    /// Fills `self.row[n] = p((n + rN)T_s − lT − ξ)`.
    fn fill_row(&mut self, block: u64, l: i64, delay: f64) {
        let offset = self.block_start(block) - l as f64 * self.symbol_period - delay;
        for (i, v) in self.row.iter_mut().enumerate() {
            *v = self.pulse.eval(i as f64 * self.sample_period + offset);
        }
    }

    /// Adds `Σ_l |FFT(p_l · phasor)[k]|²` for one block and delay to `acc`.
    fn accumulate_analytic(&mut self, block: u64, delay: f64, acc: &mut [f64]) {
        let (lo, hi) = self.symbol_range(block, delay);
        for l in lo..=hi {
            self.fill_row(block, l, delay);
            for ((b, &p), &ph) in self.buf.iter_mut().zip(&self.row).zip(&self.phasor) {
                *b = ph * p;
            }
            self.fft.forward(&mut self.buf, &mut self.scratch);
            for (a, b) in acc.iter_mut().zip(&self.buf) {
                *a += b.norm_sqr();
            }
        }
    }

    /// Synthesizes block `block` of the sampled interferer with a fresh delay
    /// and fresh QPSK symbols of power `sigma_b2`. Returns the per-sample mean
    /// power of the time-domain block; `out` receives the `1/√N`-normalized
    /// FFT of the block.
    pub fn synthesize_block<R: Rng + ?Sized>(
        &mut self,
        block: u64,
        sigma_b2: f64,
        rng: &mut R,
        out: &mut [Complex64],
    ) -> f64 {
        assert_eq!(out.len(), self.n);
        let delay = rng.random::<f64>() * self.symbol_period;
        let amp = math::sqrt(sigma_b2) * FRAC_1_SQRT_2;
        let (lo, hi) = self.symbol_range(block, delay);
        let mut samples = vec![Complex64::new(0.0, 0.0); self.n];
        for l in lo..=hi {
            let bits: u8 = rng.random();
            let sym = Complex64::new(
                if bits & 1 == 0 { amp } else { -amp },
                if bits & 2 == 0 { amp } else { -amp },
            );
            self.fill_row(block, l, delay);
            for (s, &p) in samples.iter_mut().zip(&self.row) {
                *s += sym * p;
            }
        }
        // absolute carrier phase e^{j2π F (n + rN)}
        let block_phase = unit_phasor(self.freq * ((block % (1 << 40)) as f64 * self.n as f64));
        let mut power = 0.0;
        let scale = 1.0 / math::sqrt(self.n as f64);
        for ((o, s), &ph) in out.iter_mut().zip(&samples).zip(&self.phasor) {
            let v = s * ph * block_phase;
            power += v.norm_sqr();
            *o = v;
        }
        self.fft.forward(out, &mut self.scratch);
        for o in out.iter_mut() {
            *o *= scale;
        }
        power / self.n as f64
    }
}

fn unit_phasor(cycles: f64) -> Complex64 {
    let frac = cycles - math::floor(cycles);
    let (s, c) = math::sin_cos(2.0 * PI * frac);
    Complex64::new(c, s)
}

/// Analytic profile averaged over `averaging.num_blocks` blocks and
/// `averaging.num_delays` delays drawn uniformly in `[0, T)` from `rng`.
pub fn analytic_variance<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    sigma_b2: f64,
    averaging: Averaging,
    rng: &mut R,
) -> Result<InterferenceProfile> {
    if averaging.num_blocks == 0 || averaging.num_delays == 0 {
        return Err(Error::Domain("averaging needs at least one block and one delay"));
    }
    let period = cfg.nb.symbol_period_s;
    let delays: Vec<f64> = (0..averaging.num_delays)
        .map(|_| rng.random::<f64>() * period)
        .collect();
    analytic_variance_for_delays(cfg, sigma_b2, averaging.num_blocks, &delays)
}

/// Analytic profile averaged over `num_blocks` blocks and the given delays.
pub fn analytic_variance_for_delays(
    cfg: &SystemConfig,
    sigma_b2: f64,
    num_blocks: usize,
    delays: &[f64],
) -> Result<InterferenceProfile> {
    if num_blocks == 0 || delays.is_empty() {
        return Err(Error::Domain("averaging needs at least one block and one delay"));
    }
    let mut sampler = NbSampler::new(cfg);
    let n = sampler.num_subcarriers();
    let mut acc = vec![0.0; n];
    for &delay in delays {
        for block in 0..num_blocks as u64 {
            sampler.accumulate_analytic(block, delay, &mut acc);
        }
    }
    let norm = 1.0 / (n as f64 * num_blocks as f64 * delays.len() as f64);
    let unit = InterferenceProfile {
        variances: acc.into_iter().map(|a| a * norm).collect(),
        symbol_power: 1.0,
        normalized_freq: cfg.nb.normalized_freq,
        method: ProfileMethod::Analytic,
    };
    Ok(unit.rescaled(sigma_b2))
}

/// Running sums of a Monte Carlo interference run. Accumulators over
/// disjoint block ranges can be merged.
#[derive(Debug, Clone, PartialEq)]
pub struct McAccumulator {
    pub sum_sq: Vec<f64>,
    pub sample_power_sum: f64,
    pub num_blocks: u64,
}

impl McAccumulator {
    pub fn new(n: usize) -> McAccumulator {
        McAccumulator {
            sum_sq: vec![0.0; n],
            sample_power_sum: 0.0,
            num_blocks: 0,
        }
    }

    pub fn merge(&mut self, other: &McAccumulator) {
        for (a, b) in self.sum_sq.iter_mut().zip(&other.sum_sq) {
            *a += b;
        }
        self.sample_power_sum += other.sample_power_sum;
        self.num_blocks += other.num_blocks;
    }

    /// Mean power of a time-domain interference sample.
    pub fn mean_sample_power(&self) -> f64 {
        self.sample_power_sum / self.num_blocks as f64
    }

    pub fn profile(&self, sigma_b2: f64, normalized_freq: f64) -> InterferenceProfile {
        let inv = 1.0 / self.num_blocks as f64;
        InterferenceProfile {
            variances: self.sum_sq.iter().map(|s| s * inv).collect(),
            symbol_power: sigma_b2,
            normalized_freq,
            method: ProfileMethod::MonteCarlo,
        }
    }
}

/// Synthesizes blocks `first_block .. first_block + num_blocks` and sums
/// `|Z_k|²` and per-sample power.
pub fn mc_accumulate<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    sigma_b2: f64,
    first_block: u64,
    num_blocks: usize,
    rng: &mut R,
) -> McAccumulator {
    let mut sampler = NbSampler::new(cfg);
    let n = sampler.num_subcarriers();
    let mut acc = McAccumulator::new(n);
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for r in 0..num_blocks as u64 {
        let p = sampler.synthesize_block(first_block + r, sigma_b2, rng, &mut out);
        acc.sample_power_sum += p;
        for (a, z) in acc.sum_sq.iter_mut().zip(&out) {
            *a += z.norm_sqr();
        }
    }
    acc.num_blocks = num_blocks as u64;
    acc
}

/// Monte Carlo estimate of the profile from `num_symbols` OFDM blocks.
pub fn mc_variance<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    sigma_b2: f64,
    num_symbols: usize,
    rng: &mut R,
) -> InterferenceProfile {
    mc_accumulate(cfg, sigma_b2, 0, num_symbols.max(1), rng).profile(sigma_b2, cfg.nb.normalized_freq)
}

/// `σ_b²` that puts the post-FFT signal-to-interference ratio at `sir_db`:
/// `σ_s² / ((1/N) Σ_k σ²_{I,k}) = 10^{SIR/10}`, where `unit_profile` was
/// computed at `σ_b² = 1`.
pub fn sigma_b2_for_sir(
    cfg: &SystemConfig,
    sir_db: f64,
    unit_profile: &InterferenceProfile,
) -> Result<f64> {
    if !sir_db.is_finite() {
        return Err(Error::Domain("SIR must be finite"));
    }
    let mean = unit_profile.mean();
    if !(mean > 0.0) {
        return Err(Error::Domain("interference profile is identically zero; SIR cannot be set"));
    }
    Ok(cfg.link.symbol_power / (mean * math::db_to_linear(sir_db)))
}

/// Computes the unit-power analytic profile with the configured averaging and
/// returns the calibrated `σ_b²` together with it.
pub fn calibrate_sigma_b2<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    sir_db: f64,
    rng: &mut R,
) -> Result<(f64, InterferenceProfile)> {
    let unit = analytic_variance(cfg, 1.0, cfg.nb.averaging, rng)?;
    let s = sigma_b2_for_sir(cfg, sir_db, &unit)?;
    Ok((s, unit))
}
