use std::f64::consts::PI;

use magsweep::dsp::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FS: f64 = 100.0;

fn tones(n: usize, parts: &[(f64, f64, f64)]) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let t = i as f64 / FS;
            parts.iter().map(|(f, a, p)| a * (2.0 * PI * f * t + p).sin()).sum()
        })
        .collect()
}

fn rel_l2(got: &[f64], want: &[f64]) -> f64 {
    let num: f64 = got.iter().zip(want).map(|(a, b)| (a - b) * (a - b)).sum();
    let den: f64 = want.iter().map(|b| b * b).sum();
    (num / den).sqrt()
}

fn demean(x: &[f64]) -> Vec<f64> {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| v - m).collect()
}

#[test]
fn multitone_round_trip_with_default_bank() {
    let n = 10_000;
    let x = tones(n, &[(0.05, 3.0, 0.3), (0.39, 1.0, 1.1), (1.0, 2.0, 2.0), (2.0, 0.5, 0.7)]);
    let w = cwt(&x, &default_scales(n), FS).unwrap();
    let y = icwt(&w);
    let err = rel_l2(&y, &demean(&x));
    assert!(err <= 0.02, "round-trip error {err}");
}

#[test]
fn round_trip_energy_loss_is_small() {
    let n = 4096;
    let x = tones(n, &[(0.3, 1.0, 0.0), (1.7, 1.0, 0.5)]);
    let y = icwt(&cwt(&x, &default_scales(n), FS).unwrap());
    let ex: f64 = x.iter().map(|v| v * v).sum();
    let ey: f64 = y.iter().map(|v| v * v).sum();
    assert!((1.0 - ey / ex).abs() <= 0.05, "{}", ey / ex);
}

#[test]
fn sinusoid_peaks_at_its_centre_scale() {
    let n = 4096;
    let scales = default_scales(n);
    for f in [0.1, 0.5, 2.0, 7.0] {
        let w = cwt(&tones(n, &[(f, 1.0, 0.0)]), &scales, FS).unwrap();
        let mid = n / 2;
        let best = (0..w.n_scales())
            .max_by(|&a, &b| w.row(a)[mid].norm().total_cmp(&w.row(b)[mid].norm()))
            .unwrap();
        // period in samples = FS / f
        let want = (0..scales.len())
            .min_by(|&a, &b| {
                let pa = (scale_to_period(scales[a]) - FS / f).abs();
                let pb = (scale_to_period(scales[b]) - FS / f).abs();
                pa.total_cmp(&pb)
            })
            .unwrap();
        assert!(best.abs_diff(want) <= 1, "f {f}: bin {best} vs {want}");
    }
}

#[test]
fn zero_spectrum_inverts_to_zero() {
    let w = WaveletSpectrum::zeros(default_scales(512), 512, FS);
    assert!(icwt(&w).iter().all(|v| *v == 0.0));
}

#[test]
fn lowpass_stopband_5hz_is_60db_down() {
    let n = 6000;
    let y = lowpass(&tones(n, &[(5.0, 1.0, 0.0)]), 0.5, FS).unwrap();
    // analytic: (1 + (5/0.5)^8)^-1 per forward-backward pair, far below 1e-3
    assert!(butterworth_gain(5.0, 0.5, FS) <= 1e-3);
    let peak = y[n / 4..3 * n / 4].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(peak <= 1e-3, "{peak}");
}

#[test]
fn lowpass_passband_005hz_within_2pct() {
    let n = 20_000;
    let y = lowpass(&tones(n, &[(0.05, 1.0, 0.0)]), 0.5, FS).unwrap();
    let peak = y[n / 4..3 * n / 4].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!((peak - 1.0).abs() <= 0.02, "{peak}");
}

#[test]
fn lowpass_keeps_constants_and_is_nearly_idempotent() {
    let y = lowpass(&[7.5; 1000], 0.5, FS).unwrap();
    assert!(y.iter().all(|v| (v - 7.5).abs() <= 1e-9));
    let n = 8000;
    let x = tones(n, &[(0.05, 1.0, 0.0), (0.1, 0.5, 1.0)]);
    let once = lowpass(&x, 0.5, FS).unwrap();
    let twice = lowpass(&once, 0.5, FS).unwrap();
    assert!(rel_l2(&twice[n / 4..3 * n / 4], &once[n / 4..3 * n / 4]) < 0.01);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn band_limited_random_round_trip(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 4096;
        let parts: Vec<(f64, f64, f64)> = (0..6)
            .map(|_| (rng.gen_range(0.2..10.0), rng.gen_range(0.1..2.0), rng.gen_range(0.0..2.0 * PI)))
            .collect();
        let x = tones(n, &parts);
        let y = icwt(&cwt(&x, &default_scales(n), FS).unwrap());
        prop_assert!(rel_l2(&y, &demean(&x)) <= 0.02);
    }

    #[test]
    fn cwt_is_linear(seed in 0u64..10_000, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = 512;
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mix: Vec<f64> = x.iter().zip(&y).map(|(p, q)| a * p + b * q).collect();
        let scales = default_scales(n);
        let (wx, wy, wm) = (cwt(&x, &scales, FS).unwrap(), cwt(&y, &scales, FS).unwrap(), cwt(&mix, &scales, FS).unwrap());
        let (mut num, mut den) = (0.0, 0.0);
        for j in 0..scales.len() {
            for t in 0..n {
                let want = wx.row(j)[t] * a + wy.row(j)[t] * b;
                num += (wm.row(j)[t] - want).norm_sqr();
                den += want.norm_sqr();
            }
        }
        prop_assert!((num / den).sqrt() <= 1e-10);
    }
}
