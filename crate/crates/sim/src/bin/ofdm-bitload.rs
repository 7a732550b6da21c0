//! Command line front end.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error, 3 config error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ofdm_bitload::config_file;
use ofdm_bitload::experiments::{SweepKind, SweepOutput, SweepRunner, SweepSpec, TrialInterference};
use ofdm_bitload::output;
use ofdm_bitload::SimError;
use ofdm_bitload_core::allocator::{allocate_traced, AllocationResult, AllocationStatus, TraceStep};
use ofdm_bitload_core::channel::ChannelRealization;
use ofdm_bitload_core::config::SystemConfig;
use ofdm_bitload_core::interference::{analytic_variance_for_delays, mc_variance, InterferenceProfile};
use ofdm_bitload_core::link::Constellation;
use ofdm_bitload_core::rng::{stream_rng, MC_STREAM_BASE};
use ofdm_bitload_core::trial::{build_links, trial_channel};
use ofdm_bitload_core::verifier::{self, EmpiricalBer};
use rand::Rng;

const SMOKE_TRIALS: usize = 100;

#[derive(Debug, Parser)]
#[command(name = "ofdm-bitload", version, about = "OFDM bit loading under narrowband interference")]
struct Cli {
    /// Config file (`key = value` lines); defaults to the reference parameters.
    #[arg(long, global = true, env = "OFDM_BITLOAD_CONFIG")]
    config: Option<PathBuf>,
    /// Output CSV path. A JSON sidecar with the resolved config is written next to it.
    /// Without it the CSV goes to stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// Monte Carlo trials per grid point (default: channel.num_realizations).
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Average throughput versus normalized NB frequency.
    SweepFn(SweepArgs),
    /// Average throughput versus average SNR.
    SweepSnr(SweepArgs),
    /// Average throughput versus channel-estimation error variance.
    SweepSigmaH(SweepArgs),
    /// Allocate bits for one channel realization and print a JSON summary.
    Allocate(AllocateArgs),
    /// Per-subcarrier interference variance.
    InterferenceProfile(ProfileArgs),
    /// Transmit symbols with an allocation (or over a BER grid) and compare
    /// measured and predicted BER.
    Verify(VerifyArgs),
    /// Taps and subcarrier gains of one channel realization.
    ChannelDump(ChannelArgs),
}

#[derive(Debug, Args, Clone, Default)]
struct PointArgs {
    #[arg(long, allow_negative_numbers = true)]
    snr_db: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    sir_db: Option<f64>,
    /// Normalized NB frequency `F_n`.
    #[arg(long = "fn", allow_negative_numbers = true)]
    fnorm: Option<f64>,
    /// Channel-estimation error variance.
    #[arg(long, allow_negative_numbers = true)]
    sigma_h2: Option<f64>,
}

impl PointArgs {
    fn apply(&self, mut cfg: SystemConfig) -> ofdm_bitload::Result<SystemConfig> {
        if let Some(v) = self.snr_db {
            cfg.link.avg_snr_db = v;
        }
        if let Some(v) = self.sir_db {
            cfg.link.sir_db = v;
        }
        if let Some(v) = self.fnorm {
            cfg.nb.normalized_freq = v;
        }
        if let Some(v) = self.sigma_h2 {
            cfg.link.est_error_var = v;
        }
        config_file::validate(cfg)
    }
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Comma-separated grid, strictly increasing.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    grid: Option<Vec<f64>>,
    #[command(flatten)]
    point: PointArgs,
}

#[derive(Debug, Args)]
struct AllocateArgs {
    #[command(flatten)]
    point: PointArgs,
    /// Trial index whose channel realization is used.
    #[arg(long, default_value_t = 0)]
    trial: u64,
    /// Also write the reduction trace as CSV to this path.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ProfileArgs {
    #[arg(long = "fn")]
    fnorm: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    sir_db: Option<f64>,
    /// Also estimate the profile from this many synthesized OFDM blocks.
    #[arg(long)]
    mc_symbols: Option<usize>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    point: PointArgs,
    #[arg(long, default_value_t = 0)]
    trial: u64,
    /// OFDM symbols transmitted with the allocation.
    #[arg(long, default_value_t = 20_000)]
    symbols: u64,
    /// Use synthesized NB waveform samples instead of Gaussian interference.
    #[arg(long)]
    nb: bool,
    /// Measure every constellation over a γ grid in dB instead of verifying an
    /// allocation, e.g. `--formula 0,5,10,15,20,26`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    formula: Option<Vec<f64>>,
    /// Bit budget per point in `--formula` mode.
    #[arg(long, default_value_t = 100_000_000)]
    max_bits: u64,
}

#[derive(Debug, Args)]
struct ChannelArgs {
    #[arg(long, default_value_t = 0)]
    trial: u64,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Config(String),
    Runtime(String),
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Failure {
        match e {
            SimError::Config(_) => Failure::Config(e.to_string()),
            SimError::Sweep(_) => Failure::Usage(e.to_string()),
            SimError::Core(_) | SimError::Io { .. } => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<ofdm_bitload_core::Error> for Failure {
    fn from(e: ofdm_bitload_core::Error) -> Failure {
        Failure::Runtime(e.to_string())
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, msg) = match f {
                Failure::Usage(m) => (2, m),
                Failure::Config(m) => (3, m),
                Failure::Runtime(m) => (1, m),
            };
            eprintln!("ofdm-bitload: {}", msg.replace('\n', " "));
            ExitCode::from(code)
        }
    }
}

fn load_config(path: Option<&Path>) -> Outcome<SystemConfig> {
    match path {
        None => Ok(SystemConfig::reference()),
        Some(p) => config_file::load(p).map_err(|e| match e {
            SimError::Io { .. } => Failure::Config(e.to_string()),
            other => other.into(),
        }),
    }
}

fn run(cli: Cli) -> Outcome<()> {
    let cfg = load_config(cli.config.as_deref())?;
    if cli.trials == Some(0) {
        return Err(Failure::Usage("--trials must be at least 1".into()));
    }
    let ctx = Ctx {
        output: cli.output,
        seed: cli.seed,
        workers: cli.workers,
    };
    match cli.command {
        None => {
            eprintln!("no subcommand: running a {SMOKE_TRIALS}-trial F_n sweep (see --help)");
            let trials = cli.trials.unwrap_or(SMOKE_TRIALS);
            sweep(&ctx, cfg, SweepKind::SweepFn, None, trials)
        }
        Some(cmd) => {
            let trials = cli.trials.unwrap_or(cfg.channel.num_realizations);
            match cmd {
                Command::SweepFn(a) => sweep(&ctx, a.point.apply(cfg)?, SweepKind::SweepFn, a.grid, trials),
                Command::SweepSnr(a) => sweep(&ctx, a.point.apply(cfg)?, SweepKind::SweepSnr, a.grid, trials),
                Command::SweepSigmaH(a) => {
                    sweep(&ctx, a.point.apply(cfg)?, SweepKind::SweepSigmaH, a.grid, trials)
                }
                Command::Allocate(a) => allocate_cmd(&ctx, a.point.apply(cfg)?, a.trial, a.trace.as_deref()),
                Command::InterferenceProfile(a) => {
                    let p = PointArgs {
                        fnorm: a.fnorm,
                        sir_db: a.sir_db,
                        ..PointArgs::default()
                    };
                    profile_cmd(&ctx, p.apply(cfg)?, a.mc_symbols)
                }
                Command::Verify(a) => {
                    let c = a.point.apply(cfg)?;
                    match &a.formula {
                        Some(grid) => formula_cmd(&ctx, &c, grid, a.max_bits),
                        None => verify_cmd(&ctx, &c, a.trial, a.symbols, a.nb),
                    }
                }
                Command::ChannelDump(a) => channel_cmd(&ctx, &cfg, a.trial),
            }
        }
    }
}

struct Ctx {
    output: Option<PathBuf>,
    seed: u64,
    workers: Option<usize>,
}

impl Ctx {
    /// Writes `csv` to the output path with a JSON sidecar, or to stdout.
    fn emit<T: Serialize>(&self, csv: &str, sidecar: &T) -> Outcome<()> {
        match &self.output {
            Some(p) => {
                output::write_atomic(p, csv.as_bytes())?;
                output::write_json(&output::sidecar_path(p), sidecar)?;
                eprintln!("wrote {} and {}", p.display(), output::sidecar_path(p).display());
            }
            None => print!("{csv}"),
        }
        Ok(())
    }
}

fn sweep(ctx: &Ctx, cfg: SystemConfig, kind: SweepKind, grid: Option<Vec<f64>>, trials: usize) -> Outcome<()> {
    let spec = SweepSpec {
        kind,
        grid: grid.unwrap_or_else(|| kind.default_grid()),
        trials,
        base_seed: ctx.seed,
    };
    spec.validate()?;
    let mut runner = SweepRunner::new(ctx.workers)?;
    let start = Instant::now();
    eprintln!("{kind:?}: {} points x {trials} trials, seed {}", spec.grid.len(), ctx.seed);
    let out: SweepOutput = runner.run_sweep(&spec, &cfg)?;
    eprintln!("done in {:.1} s", start.elapsed().as_secs_f64());
    ctx.emit(&output::sweep_csv(&out.records), &out)
}

#[derive(Debug, Serialize)]
struct AllocationSummary {
    seed: u64,
    trial: u64,
    throughput_bits: u32,
    status: AllocationStatus,
    mean_ber: Option<f64>,
    iterations: u32,
    sigma_b2: f64,
    loads: Vec<Constellation>,
    config: SystemConfig,
}

struct OnePoint {
    sigma_b2: f64,
    profile: InterferenceProfile,
    channel: ChannelRealization,
    sinrs: Vec<f64>,
    result: AllocationResult,
    trace: Vec<TraceStep>,
}

/// Allocation for trial `trial`'s channel, with the same interference a
/// sweep at this point would use.
fn allocation_for(ctx: &Ctx, cfg: &SystemConfig, trial: u64) -> Outcome<OnePoint> {
    let mut runner = SweepRunner::new(Some(1))?;
    let (sigma_b2, ti) = runner.interference(cfg, ctx.seed)?;
    let (ch, mut rng) = trial_channel(cfg, ctx.seed, trial);
    let profile = match ti {
        TrialInterference::Profile(p) => p,
        TrialInterference::PerTrialDelay { sigma_b2 } => {
            let delay = rng.random::<f64>() * cfg.nb.symbol_period_s;
            analytic_variance_for_delays(cfg, sigma_b2, cfg.nb.averaging.num_blocks, &[delay])?
        }
    };
    let links = build_links(cfg, &ch, &profile)?;
    let sinrs = links.iter().map(|l| l.sinr).collect();
    let (result, trace) = allocate_traced(&links, cfg.link.target_ber, cfg.ofdm.cp_loss_factor());
    Ok(OnePoint {
        sigma_b2,
        profile,
        channel: ch,
        sinrs,
        result,
        trace,
    })
}

fn allocate_cmd(ctx: &Ctx, cfg: SystemConfig, trial: u64, trace_path: Option<&Path>) -> Outcome<()> {
    let OnePoint {
        sigma_b2,
        channel: ch,
        sinrs,
        result: r,
        trace,
        ..
    } = allocation_for(ctx, &cfg, trial)?;
    let summary = AllocationSummary {
        seed: ctx.seed,
        trial,
        throughput_bits: r.throughput_bits,
        status: r.status,
        mean_ber: r.mean_ber,
        iterations: r.iterations,
        sigma_b2,
        loads: r.loads.clone(),
        config: cfg,
    };
    if let Some(p) = &ctx.output {
        let mut csv = String::from("k,gain_sq,sinr,constellation,ber\n");
        for (k, ((c, ber), (g, s))) in r.loads.iter().zip(&r.per_ber).zip(ch.gains_sq.iter().zip(&sinrs)).enumerate() {
            let ber = ber.map(|b| b.to_string()).unwrap_or_default();
            csv.push_str(&format!("{k},{g},{s},{},{ber}\n", c.name()));
        }
        output::write_atomic(p, csv.as_bytes())?;
        output::write_json(&output::sidecar_path(p), &summary)?;
    }
    if let Some(p) = trace_path {
        output::write_atomic(p, output::trace_csv(&trace).as_bytes())?;
        output::write_json(&output::sidecar_path(p), &summary)?;
    }
    let text = serde_json::to_string(&summary).map_err(|e| Failure::Runtime(e.to_string()))?;
    println!("{text}");
    Ok(())
}

#[derive(Debug, Serialize)]
struct ProfileSidecar<'a> {
    seed: u64,
    sigma_b2: f64,
    peak_index: usize,
    mc_symbols: Option<usize>,
    analytic: &'a InterferenceProfile,
    mc: Option<&'a InterferenceProfile>,
    config: &'a SystemConfig,
}

fn profile_cmd(ctx: &Ctx, cfg: SystemConfig, mc_symbols: Option<usize>) -> Outcome<()> {
    let mut runner = SweepRunner::new(ctx.workers)?;
    let unit = runner.unit_profile(&cfg, ctx.seed)?;
    let (sigma_b2, _) = runner.interference(&cfg, ctx.seed)?;
    let analytic = unit.rescaled(sigma_b2);
    let mc = mc_symbols.map(|n| {
        eprintln!("synthesizing {n} OFDM blocks");
        let mut rng = stream_rng(ctx.seed, MC_STREAM_BASE);
        mc_variance(&cfg, sigma_b2, n, &mut rng)
    });
    let side = ProfileSidecar {
        seed: ctx.seed,
        sigma_b2,
        peak_index: analytic.peak_index(),
        mc_symbols,
        analytic: &analytic,
        mc: mc.as_ref(),
        config: &cfg,
    };
    ctx.emit(&output::profile_csv(&analytic, mc.as_ref()), &side)
}

#[derive(Debug, Serialize)]
struct VerifySidecar<'a> {
    seed: u64,
    trial: u64,
    symbols: u64,
    nb_waveform: bool,
    bits_sent: u64,
    bit_errors: u64,
    mean_measured_ber: f64,
    mean_predicted_ber: f64,
    binomial_sigma: f64,
    config: &'a SystemConfig,
}

fn verify_cmd(ctx: &Ctx, cfg: &SystemConfig, trial: u64, symbols: u64, nb: bool) -> Outcome<()> {
    let OnePoint {
        sigma_b2,
        profile,
        channel: ch,
        result: r,
        ..
    } = allocation_for(ctx, cfg, trial)?;
    if r.status != AllocationStatus::Met {
        return Err(Failure::Runtime("allocation stopped transmission; nothing to verify".into()));
    }
    eprintln!("transmitting {symbols} OFDM symbols ({} bits each)", r.throughput_bits);
    let mut rng = stream_rng(ctx.seed, MC_STREAM_BASE + 1);
    let check = if nb {
        verifier::verify_allocation_with_nb(cfg, &ch, &profile, sigma_b2, &r, symbols, &mut rng)?
    } else {
        verifier::verify_allocation(cfg, &ch, &profile, &r, symbols, &mut rng)?
    };
    let side = VerifySidecar {
        seed: ctx.seed,
        trial,
        symbols,
        nb_waveform: nb,
        bits_sent: check.bits_sent,
        bit_errors: check.bit_errors,
        mean_measured_ber: check.mean_measured_ber,
        mean_predicted_ber: check.mean_predicted_ber,
        binomial_sigma: check.binomial_sigma(),
        config: cfg,
    };
    eprintln!(
        "mean BER measured {:.4e}, predicted {:.4e} ({} bits)",
        check.mean_measured_ber, check.mean_predicted_ber, check.bits_sent
    );
    ctx.emit(&output::verify_csv(&check.per_subcarrier), &side)
}

#[derive(Debug, Serialize)]
struct FormulaSidecar<'a> {
    seed: u64,
    cp_loss: f64,
    gamma_db: &'a [f64],
    max_bits: u64,
    skipped: Vec<(Constellation, f64)>,
    rows: &'a [(f64, EmpiricalBer)],
}

fn formula_cmd(ctx: &Ctx, cfg: &SystemConfig, grid: &[f64], max_bits: u64) -> Outcome<()> {
    let cp = cfg.ofdm.cp_loss_factor();
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for (i, &db) in grid.iter().enumerate() {
        let gamma = 10f64.powf(db / 10.0);
        for (j, c) in Constellation::ALL.into_iter().filter(|c| c.is_active()).enumerate() {
            let p = ofdm_bitload_core::link::ber(c, gamma, cp)?;
            let need = verifier::required_bits(p, verifier::MIN_EXPECTED_ERRORS);
            if !(need <= max_bits as f64) {
                eprintln!("skip {} at {db} dB: needs {need:.3e} bits", c.name());
                skipped.push((c, db));
                continue;
            }
            let bits = (need as u64).max(10_000).min(max_bits);
            let mut rng = stream_rng(ctx.seed, MC_STREAM_BASE + 2 + (i * 8 + j) as u64);
            rows.push((db, verifier::measure_ber(c, gamma, cp, bits, &mut rng)?));
        }
    }
    let side = FormulaSidecar {
        seed: ctx.seed,
        cp_loss: cp,
        gamma_db: grid,
        max_bits,
        skipped,
        rows: &rows,
    };
    let mut csv = String::from("gamma_db,constellation,predicted_ber,measured_ber,bits_sent,deviation_sigmas\n");
    for (db, e) in &rows {
        csv.push_str(&format!(
            "{db},{},{},{},{},{}\n",
            e.constellation.name(),
            e.predicted_ber,
            e.measured_ber,
            e.bits_sent,
            e.deviation_sigmas()
        ));
    }
    ctx.emit(&csv, &side)
}

#[derive(Debug, Serialize)]
struct ChannelSidecar<'a> {
    seed: u64,
    trial: u64,
    taps_path: Option<PathBuf>,
    config: &'a SystemConfig,
}

fn channel_cmd(ctx: &Ctx, cfg: &SystemConfig, trial: u64) -> Outcome<()> {
    let (ch, _) = trial_channel(cfg, ctx.seed, trial);
    let taps_path = ctx.output.as_ref().map(|p| p.with_extension("taps.csv"));
    if let Some(t) = &taps_path {
        output::write_atomic(t, output::taps_csv(&ch).as_bytes())?;
    }
    let side = ChannelSidecar {
        seed: ctx.seed,
        trial,
        taps_path,
        config: cfg,
    };
    ctx.emit(&output::gains_csv(&ch), &side)
}
