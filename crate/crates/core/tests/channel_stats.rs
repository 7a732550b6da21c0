use ofdm_bitload_core::channel::{draw_realization, tap_powers};
use ofdm_bitload_core::config::SystemConfig;
use ofdm_bitload_core::rng::trial_rng;

const REALIZATIONS: u64 = 10_000;

#[test]
fn subcarrier_gains_average_to_one() {
    let cfg = SystemConfig::reference();
    let n = cfg.ofdm.num_subcarriers;
    let mut sum = vec![0.0; n];
    let mut sum_sq = vec![0.0; n];
    for t in 0..REALIZATIONS {
        let r = draw_realization(&cfg.channel, &cfg.ofdm, &mut trial_rng(3, t));
        for (k, g) in r.gains_sq.iter().enumerate() {
            sum[k] += g;
            sum_sq[k] += g * g;
        }
    }
    let m = REALIZATIONS as f64;
    for k in 0..n {
        let mean = sum[k] / m;
        let se = ((sum_sq[k] / m - mean * mean) / m).sqrt();
        // |H_k|² is exponential with unit mean, so the SE is about 1/√m
        assert!((mean - 1.0).abs() < 4.0 * se, "k={k}: {mean} ± {se}");
        assert!((0.95..=1.05).contains(&mean), "k={k}: {mean}");
    }
}

#[test]
fn tap_variances_follow_the_profile() {
    let cfg = SystemConfig::reference();
    let expect = tap_powers(&cfg.channel);
    let mut acc = vec![(0.0, 0.0); expect.len()];
    for t in 0..REALIZATIONS {
        let r = draw_realization(&cfg.channel, &cfg.ofdm, &mut trial_rng(4, t));
        for (a, h) in acc.iter_mut().zip(&r.taps) {
            a.0 += h.norm_sqr();
            a.1 += h.norm_sqr().powi(2);
        }
    }
    let m = REALIZATIONS as f64;
    for (i, (&(s, s2), &p)) in acc.iter().zip(&expect).enumerate() {
        let mean = s / m;
        let se = ((s2 / m - mean * mean) / m).sqrt();
        assert!((mean - p).abs() < 3.0 * se, "tap {i}: {mean} vs {p} (se {se})");
    }
    assert!((expect.iter().sum::<f64>() - 1.0).abs() < 1e-14);
}

#[test]
fn gains_are_parseval_consistent_with_taps() {
    let cfg = SystemConfig::reference();
    for t in 0..50 {
        let r = draw_realization(&cfg.channel, &cfg.ofdm, &mut trial_rng(5, t));
        let taps: f64 = r.taps.iter().map(|h| h.norm_sqr()).sum();
        let mean_gain: f64 = r.gains_sq.iter().sum::<f64>() / r.gains_sq.len() as f64;
        assert!((taps - mean_gain).abs() < 1e-12 * taps.max(1.0));
    }
}
