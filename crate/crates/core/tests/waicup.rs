use std::f64::consts::PI;

use magsweep::bench::{clean_record, magnitude, Cleaner, PipelineConfig};
use magsweep::dsp::{cwt, default_scales, scale_to_period};
use magsweep::metrics::pearson;
use magsweep::scenario::*;
use magsweep::waicup::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FS: f64 = 100.0;
const N: usize = 4096;

fn tone(f: f64, amp: f64, phase: f64) -> Vec<f64> {
    (0..N).map(|i| amp * (2.0 * PI * f * i as f64 / FS + phase).sin()).collect()
}

fn mix(x: &[f64], a: &[f64], k: f64) -> Vec<f64> {
    x.iter().zip(a).map(|(x, a)| x + k * a).collect()
}

fn rel_l2(got: &[f64], want: &[f64]) -> f64 {
    let num: f64 = got.iter().zip(want).map(|(a, b)| (a - b) * (a - b)).sum();
    let den: f64 = want.iter().map(|b| b * b).sum();
    (num / den).sqrt()
}

/// Hann-tapered tone. Untapered tones are not spectrally disjoint: their edge
/// discontinuities spread energy over every scale.
fn tapered(f: f64, amp: f64, phase: f64) -> Vec<f64> {
    tone(f, amp, phase)
        .into_iter()
        .enumerate()
        .map(|(i, v)| v * (PI * i as f64 / (N - 1) as f64).sin().powi(2))
        .collect()
}

#[test]
fn exact_recovery_for_constant_gains() {
    let x = tapered(0.1, 40.0, 0.4);
    let a = tapered(2.0, 300.0, 1.3);
    for k in [0.5, 2.0, 3.0, 10.0] {
        let out = clean_channel_pair(&mix(&x, &a, 1.0), &mix(&x, &a, k), FS).unwrap();
        // the cleaned series carries mean(b1), which includes the interference's mean
        let m_a = a.iter().sum::<f64>() / N as f64;
        let want: Vec<f64> = x.iter().map(|v| v + m_a).collect();
        let err = rel_l2(&out, &want);
        assert!(err <= 1e-3, "K = {k}: error {err}");
    }
}

#[test]
fn unit_gain_returns_the_average() {
    let x = tone(0.02, 40.0, 0.4);
    let a = tone(2.0, 300.0, 1.3);
    let b = mix(&x, &a, 1.0);
    let scales = default_scales(N);
    let (w1, w2) = (cwt(&b, &scales, FS).unwrap(), cwt(&b, &scales, FS).unwrap());
    let gains = estimate_gain(&w1, &w2).unwrap();
    assert!(gains.degenerate.iter().all(|d| *d));
    let r = reconstruct(&w1, &w2, &gains).unwrap();
    for ((o, p), q) in r.coefficients.iter().zip(&w1.coefficients).zip(&w2.coefficients) {
        assert!((o - (p + q) * 0.5).norm() <= 1e-12 * (1.0 + p.norm()));
    }
    let out = clean_channel_pair(&b, &b, FS).unwrap();
    assert!(out.iter().all(|v| v.is_finite()));
    assert!(rel_l2(&out, &b) <= 1e-3);
}

#[test]
fn gain_estimate_within_1pct_at_interference_scales() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x = tone(0.02, 100.0, 0.0);
    let a = tone(2.0, 100.0, 0.9);
    // 40 dB below the interference
    let noise: Vec<f64> = (0..2 * N).map(|_| rng.gen_range(-1.0..1.0) * 3f64.sqrt() * 0.707).collect();
    let b1: Vec<f64> = mix(&x, &a, 1.0).iter().zip(&noise[..N]).map(|(v, n)| v + n).collect();
    let b2: Vec<f64> = mix(&x, &a, 3.0).iter().zip(&noise[N..]).map(|(v, n)| v + n).collect();
    let scales = default_scales(N);
    let g = estimate_gain(&cwt(&b1, &scales, FS).unwrap(), &cwt(&b2, &scales, FS).unwrap()).unwrap();
    let mut checked = 0;
    for (s, k) in g.scales.iter().zip(&g.k_hat) {
        // periods within a quarter octave of 50 samples (2 Hz)
        if (scale_to_period(*s) / 50.0).log2().abs() <= 0.25 {
            assert!((k - 3.0).abs() <= 0.03, "period {}: {k}", scale_to_period(*s));
            checked += 1;
        }
    }
    assert!(checked >= 3);
}

#[test]
fn scaling_inputs_scales_output() {
    let x = tone(0.05, 40.0, 0.4);
    let a = tone(0.39, 300.0, 1.3);
    let (b1, b2) = (mix(&x, &a, 1.0), mix(&x, &a, 2.5));
    let base = clean_channel_pair(&b1, &b2, FS).unwrap();
    let c = 7.0;
    let s1: Vec<f64> = b1.iter().map(|v| c * v).collect();
    let s2: Vec<f64> = b2.iter().map(|v| c * v).collect();
    let scaled = clean_channel_pair(&s1, &s2, FS).unwrap();
    let want: Vec<f64> = base.iter().map(|v| c * v).collect();
    assert!(rel_l2(&scaled, &want) <= 1e-10);
}

fn no_mine_scenario(seed: u64) -> Scenario {
    let mut s = generate_random_scenario(seed, 3, &ScenarioParams::default()).unwrap();
    s.mines.clear();
    s
}

#[test]
fn pure_interference_is_suppressed_to_noise_level() {
    let cfg = PipelineConfig::default();
    for seed in 0..3 {
        let s = no_mine_scenario(seed);
        let r = simulate(&s).unwrap();
        let cleaned = clean_record(&r, Cleaner::WaicUp, &cfg).unwrap();
        for axis in &cleaned {
            let m = axis.iter().sum::<f64>() / axis.len() as f64;
            let sd = (axis.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / axis.len() as f64).sqrt();
            assert!(sd <= 3.0 * s.noise_sigma, "seed {seed}: sd {sd}");
        }
    }
}

fn scenario_rho(record: &SurveyRecord, swap: bool) -> f64 {
    let mut axes: [Vec<f64>; 3] = Default::default();
    for (ax, slot) in axes.iter_mut().enumerate() {
        let b1 = SurveyRecord::axis(&record.b1, ax);
        let b2 = SurveyRecord::axis(&record.b2, ax);
        *slot = if swap {
            clean_channel_pair(&b2, &b1, FS)
        } else {
            clean_channel_pair(&b1, &b2, FS)
        }
        .unwrap();
    }
    pearson(&magnitude(&axes), &SurveyRecord::magnitude(&record.truth1)).unwrap()
}

#[test]
fn simulated_surveys_mean_rho_at_least_095() {
    let p = ScenarioParams::default();
    let rhos: Vec<f64> = (0..10)
        .map(|seed| scenario_rho(&simulate(&generate_random_scenario(seed, 4, &p).unwrap()).unwrap(), false))
        .collect();
    let mean = rhos.iter().sum::<f64>() / rhos.len() as f64;
    assert!(mean >= 0.95, "mean ρ {mean:.4} over {rhos:?}");
}

#[test]
fn either_sensor_order_tracks_truth() {
    let p = ScenarioParams::default();
    for seed in 0..3 {
        let r = simulate(&generate_random_scenario(seed, 4, &p).unwrap()).unwrap();
        for swap in [false, true] {
            let rho = scenario_rho(&r, swap);
            assert!(rho >= 0.95, "seed {seed} swap {swap}: ρ {rho:.4}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn output_is_always_finite(seed in 0u64..10_000, zero_diff in proptest::bool::ANY) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 512;
        let b1: Vec<f64> = (0..n).map(|_| rng.gen_range(-1e3..1e3)).collect();
        let b2: Vec<f64> = if zero_diff { b1.clone() } else { (0..n).map(|_| rng.gen_range(-1e3..1e3)).collect() };
        let out = clean_channel_pair(&b1, &b2, FS).unwrap();
        prop_assert!(out.iter().all(|v| v.is_finite()));
    }
}
