//! Acceptance criteria, one line per criterion.
//!
//! Criteria listed in `KNOWN_RED` are implemented as stated and are expected
//! to fail for the reasons given there; any other failure makes the target
//! exit nonzero.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use ofdm_bitload::experiments::{SweepKind, SweepRecord, SweepRunner, SweepSpec, TrialInterference};
use ofdm_bitload::output::sweep_csv;
use ofdm_bitload_core::allocator::{allocate, allocate_traced, AllocationStatus};
use ofdm_bitload_core::channel::draw_realization;
use ofdm_bitload_core::config::SystemConfig;
use ofdm_bitload_core::interference::{analytic_variance, mc_accumulate, InterferenceProfile, McAccumulator};
use ofdm_bitload_core::link::{self, Constellation, SubcarrierLink};
use ofdm_bitload_core::rng::{stream_rng, trial_rng, MC_STREAM_BASE, PROFILE_STREAM};
use ofdm_bitload_core::trial::{build_links, trial_channel};
use ofdm_bitload_core::verifier::{self, measure_ber};
use rand::Rng;

/// Criteria that cannot hold in the specified model:
/// 4 — most (constellation, γ) points need 10¹³ or more bits for 100 expected
///     errors, and the QPSK and square-QAM closed forms differ from exact
///     Gray demapping by far more than 3σ where they can be measured;
/// 6 — with SIR held fixed per grid point the interference power does not
///     depend on F_n, so throughput ripples with the bin offset of the peak
///     instead of rising;
/// 7 — Rayleigh deep fades keep costing bits well past 40 dB (even with no
///     interference at all the 35→40 dB step is about 12 bits); the curve
///     flattens near 45–50 dB.
const KNOWN_RED: &[u32] = &[4, 6, 7];

const SEED: u64 = 1;
const GOLDEN_SEED: u64 = 1;
const GOLDEN_TRIALS: usize = 10_000;
/// Average throughput at SNR 20 dB, SIR 0 dB, F_n 0.52, σ_h² = 0.
const GOLDEN_THROUGHPUT: f64 = 277.114;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn cfg_with(f: impl FnOnce(&mut SystemConfig)) -> SystemConfig {
    let mut c = SystemConfig::reference();
    f(&mut c);
    c.validate().unwrap()
}

fn channel_normalization() -> Outcome {
    let cfg = SystemConfig::reference();
    let n = cfg.ofdm.num_subcarriers;
    let mut sum = vec![0.0; n];
    for t in 0..10_000 {
        let r = draw_realization(&cfg.channel, &cfg.ofdm, &mut trial_rng(SEED, t));
        for (s, g) in sum.iter_mut().zip(&r.gains_sq) {
            *s += g;
        }
    }
    let means: Vec<f64> = sum.iter().map(|s| s / 10_000.0).collect();
    let lo = means.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = means.iter().copied().fold(0.0, f64::max);
    outcome(
        lo >= 0.95 && hi <= 1.05,
        format!("mean |H_k|² over 10⁴ realizations in [{lo:.4}, {hi:.4}]"),
    )
}

fn interference_mc(cfg: &SystemConfig) -> (InterferenceProfile, McAccumulator) {
    let analytic = analytic_variance(cfg, 1.0, cfg.nb.averaging, &mut stream_rng(SEED, PROFILE_STREAM)).unwrap();
    let acc = mc_accumulate(cfg, 1.0, 0, 100_000, &mut stream_rng(SEED, MC_STREAM_BASE));
    (analytic, acc)
}

fn interference_oracle(analytic: &InterferenceProfile, acc: &McAccumulator) -> Outcome {
    let mc = acc.profile(1.0, analytic.normalized_freq);
    let floor = 0.01 * analytic.peak();
    let (worst_k, worst) = analytic
        .variances
        .iter()
        .zip(&mc.variances)
        .enumerate()
        .filter(|(_, (a, _))| **a >= floor)
        .map(|(k, (a, m))| (k, ((m - a) / a).abs()))
        .fold((0, 0.0), |b, x| if x.1 > b.1 { x } else { b });
    let peak = analytic.peak_index();
    outcome(
        worst < 0.05 && peak.abs_diff(67) <= 1 && mc.peak_index().abs_diff(67) <= 1,
        format!(
            "worst relative error {:.2}% (k={worst_k}) over bins ≥ 1% of peak, 10⁵ blocks; peak k={peak} (mc {})",
            100.0 * worst,
            mc.peak_index()
        ),
    )
}

fn parseval(analytic: &InterferenceProfile, acc: &McAccumulator) -> Outcome {
    let n = analytic.len() as f64;
    let expect = n * acc.mean_sample_power();
    let rel_analytic = (analytic.total() - expect).abs() / expect;
    let rel_mc = (acc.profile(1.0, 0.0).total() - expect).abs() / expect;
    outcome(
        rel_analytic < 0.02 && rel_mc < 0.02,
        format!(
            "Σσ²_k = {:.5}, N·mean sample power = {expect:.5}: analytic off {:.3}%, Monte Carlo off {:.1e}",
            analytic.total(),
            100.0 * rel_analytic,
            rel_mc
        ),
    )
}

fn ber_formulas() -> Outcome {
    const BUDGET: f64 = 1e8;
    let cp = 0.8;
    let mut failures = Vec::new();
    let mut passed = 0;
    let mut stream = 0;
    for c in [Constellation::Bpsk, Constellation::Qpsk, Constellation::Qam16, Constellation::Qam64] {
        for db in [5.0, 10.0, 15.0, 20.0, 26.0] {
            stream += 1;
            let g = 10f64.powf(db / 10.0);
            let p = link::ber(c, g, cp).unwrap();
            let need = verifier::required_bits(p, verifier::MIN_EXPECTED_ERRORS);
            if need > BUDGET {
                failures.push(format!("{} {db}dB infeasible (p={p:.1e}, needs {need:.0e} bits)", c.name()));
                continue;
            }
            let bits = need.max(1e6) as u64;
            let e = measure_ber(c, g, cp, bits, &mut stream_rng(SEED, MC_STREAM_BASE + 100 + stream)).unwrap();
            let dev = e.deviation_sigmas();
            if dev <= 3.0 {
                passed += 1;
            } else {
                failures.push(format!(
                    "{} {db}dB measured {:.3e} vs {:.3e} ({dev:.0}σ)",
                    c.name(),
                    e.measured_ber,
                    p
                ));
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("{passed}/20 points within 3σ; {}", failures.join("; ")),
    )
}

// Independent closed forms and a literal greedy loop, for the trace oracle.
fn q(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

fn naive_ber(m: u32, g: f64, cp: f64) -> f64 {
    match m {
        1 | 2 => q((2.0 * cp * g).sqrt()),
        _ => {
            let mm = (1u32 << m) as f64;
            let a = 1.0 - 1.0 / mm.sqrt();
            let qq = q((3.0 / (mm - 1.0) * cp * g).sqrt());
            4.0 / m as f64 * a * qq * (1.0 - a * qq)
        }
    }
}

fn naive_mean(ms: &[u32], g: &[f64], cp: f64) -> Option<f64> {
    let bits: u32 = ms.iter().sum();
    (bits > 0).then(|| {
        ms.iter()
            .zip(g)
            .filter(|(m, _)| **m > 0)
            .map(|(&m, &x)| m as f64 * naive_ber(m, x, cp))
            .sum::<f64>()
            / bits as f64
    })
}

fn naive_trace(g: &[f64], target: f64, cp: f64) -> (Vec<u32>, Vec<usize>) {
    let mut ms = vec![6u32; g.len()];
    let mut victims = Vec::new();
    while let Some(m) = naive_mean(&ms, g, cp) {
        if m <= target {
            break;
        }
        let mut best: Option<(usize, f64)> = None;
        for k in (0..g.len()).filter(|&k| ms[k] > 0) {
            let b = naive_ber(ms[k], g[k], cp);
            if best.is_none_or(|(_, bb)| b > bb) {
                best = Some((k, b));
            }
        }
        let k = best.unwrap().0;
        ms[k] = match ms[k] {
            6 => 4,
            4 => 2,
            2 => 1,
            _ => 0,
        };
        victims.push(k);
    }
    (ms, victims)
}

fn links(g: &[f64]) -> Vec<SubcarrierLink> {
    g.iter()
        .enumerate()
        .map(|(index, &sinr)| SubcarrierLink {
            index,
            gain_sq: 1.0,
            sinr,
        })
        .collect()
}

fn allocator_correctness() -> Outcome {
    let cfg = SystemConfig::reference();
    let cp = cfg.ofdm.cp_loss_factor();
    let target = 1e-4;

    // (a) random instances from channel draws at random SNR and flat interference
    let mut rng = stream_rng(SEED, MC_STREAM_BASE + 200);
    let mut met = 0;
    let mut bad = 0;
    for t in 0..1000 {
        let snr_db = rng.random_range(0.0..40.0);
        let interference = rng.random_range(0.0..0.2);
        let c = cfg_with(|c| c.link.avg_snr_db = snr_db);
        let (ch, _) = trial_channel(&c, SEED + 1, t);
        let l = build_links(&c, &ch, &InterferenceProfile::flat(128, interference)).unwrap();
        let r = allocate(&l, target, cp);
        if r.iterations > 512 {
            bad += 1;
        }
        if r.status == AllocationStatus::Met {
            met += 1;
            if r.mean_ber.is_none_or(|m| m > target) {
                bad += 1;
            }
        }
    }

    // (b) four-subcarrier trace against the step-by-step oracle
    let g = [300.0, 100.0, 30.0, 10.0];
    let (r, trace) = allocate_traced(&links(&g), target, cp);
    let (ms, victims) = naive_trace(&g, target, cp);
    let got: Vec<u32> = r.loads.iter().map(|c| c.bits()).collect();
    let trace_ok = got == ms && trace.iter().map(|t| t.victim).collect::<Vec<_>>() == victims;

    // (c) all 5⁴ load vectors
    let levels = [0u32, 1, 2, 4, 6];
    let mut feasible = 0;
    for i in 0..625usize {
        let v = [levels[i % 5], levels[i / 5 % 5], levels[i / 25 % 5], levels[i / 125]];
        if naive_mean(&v, &g, cp).is_some_and(|m| m <= target) {
            feasible += 1;
        }
    }
    let greedy_feasible = naive_mean(&got, &g, cp).is_some_and(|m| m <= target);

    outcome(
        bad == 0 && trace_ok && greedy_feasible,
        format!(
            "(a) {met}/1000 met, {bad} violations; (b) trace {:?} loads {got:?} {}; (c) greedy feasible: {greedy_feasible} ({feasible}/625 vectors feasible)",
            victims,
            if trace_ok { "matches" } else { "differs" }
        ),
    )
}

/// `a` is at least `b` up to `k` combined standard errors.
fn not_below(a: &SweepRecord, b: &SweepRecord, k: f64) -> bool {
    a.avg_throughput_bits >= b.avg_throughput_bits - k * a.stderr_bits.hypot(b.stderr_bits)
}

fn curves(runner: &mut SweepRunner, kind: SweepKind, base: &SystemConfig, sirs: &[f64], trials: usize) -> Vec<Vec<SweepRecord>> {
    sirs.iter()
        .map(|&sir| {
            let cfg = cfg_with(|c| {
                *c = base.clone();
                c.link.sir_db = sir;
            });
            let spec = SweepSpec {
                kind,
                grid: kind.default_grid(),
                trials,
                base_seed: SEED,
            };
            runner.run_sweep(&spec, &cfg).unwrap().records
        })
        .collect()
}

fn monotone_violations(curve: &[SweepRecord]) -> Vec<String> {
    curve
        .windows(2)
        .filter(|w| !not_below(&w[1], &w[0], 2.0))
        .map(|w| format!("{:.2}→{:.2}: {:.1}→{:.1}", w[0].x, w[1].x, w[0].avg_throughput_bits, w[1].avg_throughput_bits))
        .collect()
}

fn ordering_violations(curves: &[Vec<SweepRecord>], labels: &[f64], higher_is_better: bool) -> usize {
    let mut n = 0;
    for i in 1..curves.len() {
        for (lo, hi) in curves[i - 1].iter().zip(&curves[i]) {
            let ok = if higher_is_better { not_below(hi, lo, 2.0) } else { not_below(lo, hi, 2.0) };
            if !ok {
                n += 1;
                eprintln!("  ordering: {} vs {} at x={}", labels[i - 1], labels[i], lo.x);
            }
        }
    }
    n
}

fn fn_trend(runner: &mut SweepRunner) -> Outcome {
    let sirs = [-20.0, -10.0, 0.0, 10.0, 20.0];
    let base = cfg_with(|c| c.link.avg_snr_db = 20.0);
    let cs = curves(runner, SweepKind::SweepFn, &base, &sirs, 2000);
    let mut parts = Vec::new();
    let mut mono_ok = true;
    for (sir, c) in sirs.iter().zip(&cs) {
        let v = monotone_violations(c);
        let lo = c.iter().map(|r| r.avg_throughput_bits).fold(f64::INFINITY, f64::min);
        let hi = c.iter().map(|r| r.avg_throughput_bits).fold(0.0, f64::max);
        mono_ok &= v.is_empty();
        parts.push(format!("SIR {sir}: {lo:.1}–{hi:.1} bits, {} drops beyond 2SE", v.len()));
    }
    let ord = ordering_violations(&cs, &sirs, true);
    outcome(
        mono_ok && ord == 0,
        format!("{}; SIR ordering violations {ord}", parts.join("; ")),
    )
}

fn snr_trend(runner: &mut SweepRunner) -> Outcome {
    let sirs = [-20.0, -10.0, 0.0, 10.0, 20.0];
    let base = SystemConfig::reference();
    let cs = curves(runner, SweepKind::SweepSnr, &base, &sirs, 2000);
    let mono: usize = cs.iter().map(|c| monotone_violations(c).len()).sum();
    let max = cs.iter().flatten().map(|r| r.avg_throughput_bits).fold(0.0, f64::max);
    let top = &cs[4];
    let n = top.len();
    let step = (top[n - 1].avg_throughput_bits - top[n - 2].avg_throughput_bits).abs();
    outcome(
        mono == 0 && step < 0.01 * 768.0 && max <= 768.0,
        format!(
            "monotonicity violations {mono}; SIR 20 dB 35→40 dB change {step:.2} bits (limit 7.68); max {max:.1} ≤ 768"
        ),
    )
}

fn sigma_h_trend(runner: &mut SweepRunner) -> Outcome {
    let grid = SweepKind::SweepSigmaH.default_grid();
    let cs: Vec<Vec<SweepRecord>> = grid
        .iter()
        .map(|&v| {
            let cfg = cfg_with(|c| c.link.est_error_var = v);
            let spec = SweepSpec {
                kind: SweepKind::SweepSnr,
                grid: SweepKind::SweepSnr.default_grid(),
                trials: 2000,
                base_seed: SEED,
            };
            runner.run_sweep(&spec, &cfg).unwrap().records
        })
        .collect();
    let ord = ordering_violations(&cs, &grid, false);
    let at20: Vec<String> = cs.iter().map(|c| format!("{:.1}", c[4].avg_throughput_bits)).collect();

    // swap σ_h² with a flat interference variance under shared seeds
    let n = 128;
    let mut swaps_equal = true;
    for (v, w) in [(0.001, 0.01), (0.1, 0.0), (0.01, 0.03)] {
        let a = cfg_with(|c| c.link.est_error_var = v);
        let b = cfg_with(|c| c.link.est_error_var = w);
        let ra = runner
            .run_trials(&a, &TrialInterference::Profile(InterferenceProfile::flat(n, w)), 2000, SEED)
            .unwrap();
        let rb = runner
            .run_trials(&b, &TrialInterference::Profile(InterferenceProfile::flat(n, v)), 2000, SEED)
            .unwrap();
        swaps_equal &= ra == rb;
    }
    outcome(
        ord == 0 && swaps_equal,
        format!(
            "ordering violations {ord} over SNR 0–40 dB; at 20 dB throughput {} for σ_h² {grid:?}; swap bit-identical: {swaps_equal}",
            at20.join(" / ")
        ),
    )
}

fn determinism() -> Outcome {
    let cfg = SystemConfig::reference();
    let spec = SweepSpec {
        kind: SweepKind::SweepFn,
        grid: vec![0.46, 0.52, 0.58],
        trials: 300,
        base_seed: 7,
    };
    let a = sweep_csv(&SweepRunner::new(Some(1)).unwrap().run_sweep(&spec, &cfg).unwrap().records);
    let b = sweep_csv(&SweepRunner::new(Some(4)).unwrap().run_sweep(&spec, &cfg).unwrap().records);
    let c = sweep_csv(&SweepRunner::new(Some(3)).unwrap().run_sweep(&spec, &cfg).unwrap().records);
    outcome(a == b && b == c, format!("1, 4 and 3 workers give identical CSV: {}", a == b && b == c))
}

fn golden(runner: &mut SweepRunner) -> Outcome {
    let cfg = cfg_with(|c| {
        c.link.avg_snr_db = 20.0;
        c.link.sir_db = 0.0;
        c.nb.normalized_freq = 0.52;
        c.link.est_error_var = 0.0;
    });
    let spec = SweepSpec {
        kind: SweepKind::SweepFn,
        grid: vec![0.52],
        trials: GOLDEN_TRIALS,
        base_seed: GOLDEN_SEED,
    };
    let r = &runner.run_sweep(&spec, &cfg).unwrap().records[0];
    outcome(
        r.avg_throughput_bits == GOLDEN_THROUGHPUT,
        format!(
            "{} bits (± {:.3}) at seed {GOLDEN_SEED}, frozen {GOLDEN_THROUGHPUT}",
            r.avg_throughput_bits, r.stderr_bits
        ),
    )
}

/// Reported, not asserted: how far the Gaussian-interference premise is off
/// for one allocation at the operating point.
fn gaussian_premise_report(runner: &mut SweepRunner) -> String {
    let cfg = SystemConfig::reference();
    let (sigma_b2, ti) = runner.interference(&cfg, SEED).unwrap();
    let TrialInterference::Profile(profile) = ti else { unreachable!() };
    let (ch, _) = trial_channel(&cfg, SEED, 0);
    let l = build_links(&cfg, &ch, &profile).unwrap();
    let r = allocate(&l, cfg.link.target_ber, cfg.ofdm.cp_loss_factor());
    let symbols = 20_000;
    let g = verifier::verify_allocation(&cfg, &ch, &profile, &r, symbols, &mut stream_rng(SEED, MC_STREAM_BASE + 300)).unwrap();
    let w = verifier::verify_allocation_with_nb(&cfg, &ch, &profile, sigma_b2, &r, symbols, &mut stream_rng(SEED, MC_STREAM_BASE + 301))
        .unwrap();
    format!(
        "Gaussian interference {:.3e} vs synthesized NB waveform {:.3e} (closed form {:.3e}, {} bits each)",
        g.mean_measured_ber, w.mean_measured_ber, g.mean_predicted_ber, g.bits_sent
    )
}

/// Reported, not asserted: symbol-level BER of the four-subcarrier example
/// allocation against the target, with 10⁸ bits.
fn four_subcarrier_report() -> String {
    let g = [300.0, 100.0, 30.0, 10.0];
    let r = allocate(&links(&g), 1e-4, 0.8);
    let symbols = 100_000_000 / r.throughput_bits as u64 + 1;
    let c = verifier::verify_loads(&r, &g, 0.8, symbols, &mut stream_rng(SEED, MC_STREAM_BASE + 302)).unwrap();
    let per: Vec<String> = c
        .per_subcarrier
        .iter()
        .map(|e| format!("{} {:.2e}/{:.2e}", e.constellation.name(), e.measured_ber, e.predicted_ber))
        .collect();
    format!(
        "four-subcarrier allocation measures {:.3e} over {} bits, {:.1}× the 1e-4 target (measured/closed form: {})",
        c.mean_measured_ber,
        c.bits_sent,
        c.mean_measured_ber / 1e-4,
        per.join(", ")
    )
}

fn main() -> ExitCode {
    let mut runner = SweepRunner::new(None).unwrap();
    let mut unexpected = Vec::new();
    let mut report = |id: u32, name: &str, limit: Duration, f: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = f();
        let t = start.elapsed();
        let in_time = t <= limit;
        let pass = o.pass && in_time;
        let tag = if pass { "PASS" } else { "FAIL" };
        let known = if !pass && KNOWN_RED.contains(&id) { " [known red, see notes]" } else { "" };
        println!(
            "criterion {id:>2} {tag} {name}: {} [{:.1} s, limit {} s]{known}",
            o.detail,
            t.as_secs_f64(),
            limit.as_secs()
        );
        if !pass && !KNOWN_RED.contains(&id) {
            unexpected.push(id);
        }
    };
    let secs = Duration::from_secs;

    report(1, "channel normalization", secs(10), &mut channel_normalization);
    let cfg = SystemConfig::reference();
    let mut shared = None;
    report(2, "interference oracle", secs(60), &mut || {
        let (a, acc) = interference_mc(&cfg);
        let o = interference_oracle(&a, &acc);
        shared = Some((a, acc));
        o
    });
    // reuses the Monte Carlo run of criterion 2
    report(3, "Parseval identity", secs(30), &mut || {
        let (a, acc) = shared.as_ref().unwrap();
        parseval(a, acc)
    });
    report(4, "BER closed forms", secs(120), &mut ber_formulas);
    report(5, "allocator correctness", secs(10), &mut allocator_correctness);
    report(6, "throughput vs F_n", secs(300), &mut || fn_trend(&mut runner));
    report(7, "throughput vs SNR", secs(300), &mut || snr_trend(&mut runner));
    report(8, "throughput vs σ_h²", secs(300), &mut || sigma_h_trend(&mut runner));
    report(9, "determinism", secs(60), &mut determinism);
    report(10, "golden regression", secs(120), &mut || golden(&mut runner));
    println!("report: {}", gaussian_premise_report(&mut runner));
    println!("report: {}", four_subcarrier_report());

    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
