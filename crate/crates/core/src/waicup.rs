//! Two-magnetometer interference cancellation in the wavelet domain.
//!
//! Both channels see the same ambient field `X` but the UAV interference `A`
//! couples with a different, scale-dependent gain into each:
//! `W₁ = X + A`, `W₂ = X + K·A`. The difference `D = W₂ − W₁` carries only
//! interference, which gives a correlation estimate of `K` per scale and then
//! `X̂ = (K̂·W₁ − W₂) / (K̂ − 1)`.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dsp::{default_scales, icwt, CwtPlan, WaveletSpectrum};
use crate::error::{invalid, Error, Result};

/// Scales with |K̂ − 1| below this are treated as interference-free.
pub const DEFAULT_DEGENERACY_EPS: f64 = 1e-2;

/// Per-scale gain estimate.
///
/// A scale is degenerate when |K̂ − 1| < ε (no usable interference contrast)
/// or when K̂ is not finite, which happens when `D` is orthogonal to `W₁`:
/// either `D = 0` or sensor 1 carries no interference at that scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainProfile {
    pub scales: Vec<f64>,
    pub k_hat: Vec<f64>,
    pub degenerate: Vec<bool>,
}

impl GainProfile {
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "scale,k_hat,degenerate")?;
        for ((s, k), d) in self.scales.iter().zip(&self.k_hat).zip(&self.degenerate) {
            writeln!(out, "{s},{k},{}", u8::from(*d))?;
        }
        Ok(())
    }
}

/// Real part of Σ conj(a)·b.
fn real_inner(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

pub fn estimate_gain(w1: &WaveletSpectrum, w2: &WaveletSpectrum) -> Result<GainProfile> {
    estimate_gain_with(w1, w2, DEFAULT_DEGENERACY_EPS)
}

pub fn estimate_gain_with(w1: &WaveletSpectrum, w2: &WaveletSpectrum, eps: f64) -> Result<GainProfile> {
    if !w1.same_layout(w2) {
        return Err(Error::LengthMismatch("spectra differ in scales or length".into()));
    }
    let mut k_hat = Vec::with_capacity(w1.n_scales());
    let mut degenerate = Vec::with_capacity(w1.n_scales());
    let mut diff = vec![Complex64::new(0.0, 0.0); w1.n_samples];
    for (r1, r2) in w1.rows().zip(w2.rows()) {
        for ((d, a), b) in diff.iter_mut().zip(r1).zip(r2) {
            *d = b - a;
        }
        let num = real_inner(&diff, r2);
        let den = real_inner(&diff, r1);
        let k = num / den;
        k_hat.push(k);
        let weak = real_inner(&diff, &diff) < eps * eps * real_inner(r1, r1);
        degenerate.push(!k.is_finite() || (k - 1.0).abs() < eps || weak);
    }
    Ok(GainProfile {
        scales: w1.scales.clone(),
        k_hat,
        degenerate,
    })
}

/// Interference-free spectrum estimate.
///
/// Degenerate scales with a finite K̂ pass the channel mean through. A
/// non-finite K̂ takes the K̂ → ∞ limit of the estimator, which is `W₁`
/// (equal to the channel mean when `D = 0`).
pub fn reconstruct(w1: &WaveletSpectrum, w2: &WaveletSpectrum, gains: &GainProfile) -> Result<WaveletSpectrum> {
    if !w1.same_layout(w2) || gains.k_hat.len() != w1.n_scales() || gains.degenerate.len() != w1.n_scales() {
        return Err(Error::LengthMismatch("gain profile does not match spectra".into()));
    }
    let mut out = WaveletSpectrum::zeros(w1.scales.clone(), w1.n_samples, w1.sample_rate);
    for j in 0..w1.n_scales() {
        let (r1, r2) = (w1.row(j), w2.row(j));
        let row = out.row_mut(j);
        let k = gains.k_hat[j];
        if gains.degenerate[j] && !k.is_finite() {
            row.copy_from_slice(r1);
        } else if gains.degenerate[j] {
            for ((o, a), b) in row.iter_mut().zip(r1).zip(r2) {
                *o = (a + b) * 0.5;
            }
        } else {
            let inv = 1.0 / (k - 1.0);
            for ((o, a), b) in row.iter_mut().zip(r1).zip(r2) {
                *o = (a * k - b) * inv;
            }
        }
    }
    Ok(out)
}

/// Interference canceller bound to one series length and scale bank.
pub struct Canceller {
    plan: CwtPlan,
    sample_rate: f64,
    eps: f64,
}

impl Canceller {
    pub fn new(n_samples: usize, sample_rate: f64) -> Self {
        Self::with_scales(n_samples, sample_rate, &default_scales(n_samples))
    }

    pub fn with_scales(n_samples: usize, sample_rate: f64, scales: &[f64]) -> Self {
        Self {
            plan: CwtPlan::new(n_samples, scales),
            sample_rate,
            eps: DEFAULT_DEGENERACY_EPS,
        }
    }

    pub fn with_degeneracy_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    /// Returns the cleaned series together with the gain profile that produced it.
    pub fn clean(&self, b1: &[f64], b2: &[f64]) -> Result<(Vec<f64>, GainProfile)> {
        if b1.len() != b2.len() {
            return Err(Error::LengthMismatch(format!("channel lengths {} and {}", b1.len(), b2.len())));
        }
        let w1 = self.plan.transform(b1, self.sample_rate)?;
        let w2 = self.plan.transform(b2, self.sample_rate)?;
        let gains = estimate_gain_with(&w1, &w2, self.eps)?;
        let x_hat = reconstruct(&w1, &w2, &gains)?;
        let mean = b1.iter().sum::<f64>() / b1.len() as f64;
        let cleaned = icwt(&x_hat).into_iter().map(|v| v + mean).collect();
        Ok((cleaned, gains))
    }
}

/// Clean one scalar channel pair with the default scale bank.
pub fn clean_channel_pair(b1: &[f64], b2: &[f64], sample_rate: f64) -> Result<Vec<f64>> {
    if !(sample_rate > 0.0) {
        return Err(invalid("sample_rate", "must be positive"));
    }
    if b1.len() != b2.len() {
        return Err(Error::LengthMismatch(format!("channel lengths {} and {}", b1.len(), b2.len())));
    }
    Canceller::new(b1.len(), sample_rate).clean(b1, b2).map(|(x, _)| x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsp::cwt;
    use std::f64::consts::PI;

    fn tone(n: usize, fs: f64, f: f64, amp: f64, phase: f64) -> Vec<f64> {
        (0..n).map(|i| amp * (2.0 * PI * f * i as f64 / fs + phase).sin()).collect()
    }

    #[test]
    fn pure_gain_two_is_recovered_exactly() {
        let (n, fs) = (2048, 100.0);
        let a = tone(n, fs, 2.0, 1.0, 0.2);
        let a2: Vec<f64> = a.iter().map(|v| 2.0 * v).collect();
        let scales = default_scales(n);
        let w1 = cwt(&a, &scales, fs).unwrap();
        let w2 = cwt(&a2, &scales, fs).unwrap();
        let g = estimate_gain(&w1, &w2).unwrap();
        for (k, energy) in g.k_hat.iter().zip(w1.rows().map(|r| real_inner(r, r))) {
            if energy > 1e-20 {
                assert!((k - 2.0).abs() < 1e-9, "k = {k}");
            }
        }
    }

    #[test]
    fn identical_channels_are_degenerate() {
        let (n, fs) = (1024, 100.0);
        let x = tone(n, fs, 1.0, 5.0, 0.0);
        let scales = default_scales(n);
        let w = cwt(&x, &scales, fs).unwrap();
        let g = estimate_gain(&w, &w).unwrap();
        assert!(g.degenerate.iter().all(|d| *d));
        let r = reconstruct(&w, &w, &g).unwrap();
        assert_eq!(r, w);
    }

    #[test]
    fn substitution_identity() {
        // W1 = X + A, W2 = X + 2A with K̂ = 2 gives X exactly
        let (n, fs) = (512, 100.0);
        let scales = default_scales(n);
        let x = cwt(&tone(n, fs, 0.5, 1.0, 0.0), &scales, fs).unwrap();
        let a = cwt(&tone(n, fs, 5.0, 1.0, 1.0), &scales, fs).unwrap();
        let mut w1 = x.clone();
        let mut w2 = x.clone();
        for i in 0..x.coefficients.len() {
            w1.coefficients[i] += a.coefficients[i];
            w2.coefficients[i] += a.coefficients[i] * 2.0;
        }
        let gains = GainProfile {
            scales: scales.clone(),
            k_hat: vec![2.0; scales.len()],
            degenerate: vec![false; scales.len()],
        };
        let r = reconstruct(&w1, &w2, &gains).unwrap();
        for (got, want) in r.coefficients.iter().zip(&x.coefficients) {
            assert!((got - want).norm() < 1e-12 * (1.0 + want.norm()));
        }
    }

    #[test]
    fn mismatched_inputs_rejected() {
        let w1 = cwt(&[1.0; 64], &[2.0, 3.0], 1.0).unwrap();
        let w2 = cwt(&[1.0; 64], &[2.0, 4.0], 1.0).unwrap();
        assert!(estimate_gain(&w1, &w2).is_err());
        assert!(clean_channel_pair(&[1.0; 64], &[1.0; 63], 1.0).is_err());
    }

    #[test]
    fn gain_profile_csv() {
        let g = GainProfile {
            scales: vec![2.0, 4.0],
            k_hat: vec![3.0, 1.0],
            degenerate: vec![false, true],
        };
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "scale,k_hat,degenerate\n2,3,0\n4,1,1\n");
    }
}
