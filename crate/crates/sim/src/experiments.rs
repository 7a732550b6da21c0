//! Monte Carlo sweeps of average throughput.
//!
//! Trial `i` of every grid point reads ChaCha stream `i` under the sweep's
//! base seed, so all grid points and all curves sharing a seed see the same
//! channel realizations. Trials run on a rayon pool; results are gathered in
//! trial order and reduced sequentially, which keeps the output independent
//! of the worker count.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use ofdm_bitload_core::allocator::{AllocationResult, AllocationStatus};
use ofdm_bitload_core::config::SystemConfig;
use ofdm_bitload_core::interference::{analytic_variance, sigma_b2_for_sir, InterferenceProfile};
use ofdm_bitload_core::rng::{stream_rng, PROFILE_STREAM};
use ofdm_bitload_core::trial::{run_trial, run_trial_with_delay};

use crate::config_file;
use crate::error::{Result, SimError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// Independent variable: normalized NB frequency `F_n`.
    SweepFn,
    /// Independent variable: average SNR in dB.
    SweepSnr,
    /// Independent variable: channel-estimation error variance `σ_h²`.
    SweepSigmaH,
}

impl SweepKind {
    /// Grid used when none is given.
    pub fn default_grid(self) -> Vec<f64> {
        match self {
            SweepKind::SweepFn => (0..=15).map(|i| (40 + 2 * i) as f64 / 100.0).collect(),
            SweepKind::SweepSnr => (0..=8).map(|i| (5 * i) as f64).collect(),
            SweepKind::SweepSigmaH => vec![0.0, 0.001, 0.01, 0.1],
        }
    }

    fn apply(self, cfg: &SystemConfig, x: f64) -> Result<SystemConfig> {
        let mut c = cfg.clone();
        match self {
            SweepKind::SweepFn => c.nb.normalized_freq = x,
            SweepKind::SweepSnr => c.link.avg_snr_db = x,
            SweepKind::SweepSigmaH => c.link.est_error_var = x,
        }
        config_file::validate(c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub grid: Vec<f64>,
    pub trials: usize,
    pub base_seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(SimError::Sweep("grid is empty"));
        }
        if self.grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(SimError::Sweep("grid must be strictly increasing"));
        }
        if self.trials == 0 {
            return Err(SimError::Sweep("need at least one trial"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub x: f64,
    pub avg_throughput_bits: f64,
    /// Standard error of the mean throughput.
    pub stderr_bits: f64,
    pub stopped_fraction: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Extra per-point information kept for the JSON sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointDetail {
    pub x: f64,
    pub sigma_b2: f64,
    pub mean_interference_var: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutput {
    pub spec: SweepSpec,
    pub config: SystemConfig,
    pub records: Vec<SweepRecord>,
    pub points: Vec<PointDetail>,
}

/// How each trial obtains its interference.
#[derive(Debug, Clone)]
pub enum TrialInterference {
    /// One delay-averaged profile for every trial.
    Profile(InterferenceProfile),
    /// Each trial draws a delay and evaluates the single-delay profile at
    /// this symbol power.
    PerTrialDelay { sigma_b2: f64 },
}

/// Runs sweeps on a fixed-size pool and caches unit-power profiles by `F_n`.
#[derive(Debug)]
pub struct SweepRunner {
    pool: rayon::ThreadPool,
    cache: BTreeMap<(u64, u64), InterferenceProfile>,
}

impl SweepRunner {
    /// `workers = None` uses the available parallelism.
    pub fn new(workers: Option<usize>) -> Result<SweepRunner> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(w) = workers {
            b = b.num_threads(w.max(1));
        }
        let pool = b
            .build()
            .map_err(|e| SimError::Config(format!("cannot start worker pool: {e}")))?;
        Ok(SweepRunner {
            pool,
            cache: BTreeMap::new(),
        })
    }

    /// Delay-averaged analytic profile at unit symbol power for `cfg`'s
    /// `F_n`, with delays drawn from the profile stream of `base_seed`.
    pub fn unit_profile(&mut self, cfg: &SystemConfig, base_seed: u64) -> Result<InterferenceProfile> {
        let key = (cfg.nb.normalized_freq.to_bits(), base_seed);
        if let Some(p) = self.cache.get(&key) {
            return Ok(p.clone());
        }
        let mut rng = stream_rng(base_seed, PROFILE_STREAM);
        let p = analytic_variance(cfg, 1.0, cfg.nb.averaging, &mut rng)?;
        self.cache.insert(key, p.clone());
        Ok(p)
    }

    /// Precomputes unit profiles for several `F_n` values in parallel.
    pub fn warm_profiles(&mut self, cfg: &SystemConfig, fns: &[f64], base_seed: u64) -> Result<()> {
        let missing: Vec<SystemConfig> = fns
            .iter()
            .filter(|f| !self.cache.contains_key(&(f.to_bits(), base_seed)))
            .map(|&f| {
                let mut c = cfg.clone();
                c.nb.normalized_freq = f;
                config_file::validate(c)
            })
            .collect::<Result<_>>()?;
        let computed: Vec<Result<InterferenceProfile>> = self.pool.install(|| {
            missing
                .par_iter()
                .map(|c| {
                    let mut rng = stream_rng(base_seed, PROFILE_STREAM);
                    Ok(analytic_variance(c, 1.0, c.nb.averaging, &mut rng)?)
                })
                .collect()
        });
        for (c, p) in missing.iter().zip(computed) {
            self.cache.insert((c.nb.normalized_freq.to_bits(), base_seed), p?);
        }
        Ok(())
    }

    /// Calibrated interference for `cfg` at its configured SIR.
    pub fn interference(&mut self, cfg: &SystemConfig, base_seed: u64) -> Result<(f64, TrialInterference)> {
        let unit = self.unit_profile(cfg, base_seed)?;
        let sigma_b2 = sigma_b2_for_sir(cfg, cfg.link.sir_db, &unit)?;
        let ti = if cfg.nb.per_trial_delay {
            TrialInterference::PerTrialDelay { sigma_b2 }
        } else {
            TrialInterference::Profile(unit.rescaled(sigma_b2))
        };
        Ok((sigma_b2, ti))
    }

    /// Runs `trials` trials and returns the results in trial order.
    pub fn run_trials(
        &self,
        cfg: &SystemConfig,
        interference: &TrialInterference,
        trials: usize,
        base_seed: u64,
    ) -> Result<Vec<AllocationResult>> {
        self.pool.install(|| {
            (0..trials as u64)
                .into_par_iter()
                .map(|i| match interference {
                    TrialInterference::Profile(p) => run_trial(cfg, p, base_seed, i),
                    TrialInterference::PerTrialDelay { sigma_b2 } => {
                        run_trial_with_delay(cfg, *sigma_b2, base_seed, i)
                    }
                })
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(SimError::from)
        })
    }

    pub fn run_point(
        &self,
        cfg: &SystemConfig,
        interference: &TrialInterference,
        x: f64,
        trials: usize,
        base_seed: u64,
    ) -> Result<SweepRecord> {
        let results = self.run_trials(cfg, interference, trials, base_seed)?;
        Ok(aggregate(x, &results, base_seed))
    }

    pub fn run_sweep(&mut self, spec: &SweepSpec, cfg: &SystemConfig) -> Result<SweepOutput> {
        spec.validate()?;
        if spec.kind == SweepKind::SweepFn {
            self.warm_profiles(cfg, &spec.grid, spec.base_seed)?;
        }
        let mut records = Vec::with_capacity(spec.grid.len());
        let mut points = Vec::with_capacity(spec.grid.len());
        for &x in &spec.grid {
            let point_cfg = spec.kind.apply(cfg, x)?;
            let (sigma_b2, interference) = self.interference(&point_cfg, spec.base_seed)?;
            let mean_interference_var = match &interference {
                TrialInterference::Profile(p) => p.mean(),
                TrialInterference::PerTrialDelay { .. } => point_cfg.link.symbol_power * db_to_linear(-point_cfg.link.sir_db),
            };
            records.push(self.run_point(&point_cfg, &interference, x, spec.trials, spec.base_seed)?);
            points.push(PointDetail {
                x,
                sigma_b2,
                mean_interference_var,
            });
        }
        Ok(SweepOutput {
            spec: spec.clone(),
            config: cfg.clone(),
            records,
            points,
        })
    }
}

fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Mean throughput, its standard error and the stopped fraction, reduced in
/// slice order.
pub fn aggregate(x: f64, results: &[AllocationResult], seed: u64) -> SweepRecord {
    let n = results.len();
    let total: u64 = results.iter().map(|r| r.throughput_bits as u64).sum();
    let mean = total as f64 / n as f64;
    let ss: f64 = results
        .iter()
        .map(|r| {
            let d = r.throughput_bits as f64 - mean;
            d * d
        })
        .sum();
    let stderr = if n > 1 {
        (ss / (n as f64 - 1.0)).sqrt() / (n as f64).sqrt()
    } else {
        0.0
    };
    let stopped = results
        .iter()
        .filter(|r| r.status == AllocationStatus::TransmissionStopped)
        .count();
    SweepRecord {
        x,
        avg_throughput_bits: mean,
        stderr_bits: stderr,
        stopped_fraction: stopped as f64 / n as f64,
        trials: n,
        seed,
    }
}
