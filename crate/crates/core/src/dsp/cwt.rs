//! Complex Morlet continuous wavelet transform, computed by FFT convolution,
//! and its single-sum inverse.
//!
//! Scales are expressed in samples. The transform of a real signal `x` at
//! scale `s` is
//!
//! ```text
//! W(s, n) = IFFT[ X(ω) · sqrt(2πs) · ψ̂(sω) ](n),   ψ̂(u) = π^{-1/4} exp(-(u - ω₀)² / 2) for u > 0
//! ```
//!
//! and the inverse sums the real parts over scales with a log-scale
//! quadrature weight, normalized by the admissibility integral
//! `∫₀^∞ ψ̂(u)/u du` so that in-band sinusoids are reproduced with unit gain.
//!
//! Edges are handled by whole-sample symmetric reflection, taken to its
//! limit: the FFT runs over one period of the 2N-periodic even extension.
//! Every non-DC component of that extension has a period of at most 2N, so a
//! bank reaching 3N periods (ψ̂ out to u = ω₀ + 3) inverts it almost exactly,
//! edges included.

use std::f64::consts::{LN_2, PI};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{invalid, Error, Result};

/// Centre frequency of the mother wavelet, rad per unit scale.
pub const MORLET_OMEGA0: f64 = 6.0;
const VOICES_PER_OCTAVE: f64 = 8.0;

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletSpectrum {
    pub scales: Vec<f64>,
    /// Row-major `[n_scales × n_samples]`.
    pub coefficients: Vec<Complex64>,
    pub n_samples: usize,
    pub sample_rate: f64,
}

impl WaveletSpectrum {
    pub fn zeros(scales: Vec<f64>, n_samples: usize, sample_rate: f64) -> Self {
        let coefficients = vec![Complex64::new(0.0, 0.0); scales.len() * n_samples];
        Self {
            scales,
            coefficients,
            n_samples,
            sample_rate,
        }
    }

    pub fn n_scales(&self) -> usize {
        self.scales.len()
    }

    pub fn row(&self, scale_idx: usize) -> &[Complex64] {
        &self.coefficients[scale_idx * self.n_samples..(scale_idx + 1) * self.n_samples]
    }

    pub fn row_mut(&mut self, scale_idx: usize) -> &mut [Complex64] {
        &mut self.coefficients[scale_idx * self.n_samples..(scale_idx + 1) * self.n_samples]
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, Complex64> {
        self.coefficients.chunks_exact(self.n_samples.max(1))
    }

    /// Equivalent Fourier period of each scale, in seconds.
    pub fn periods(&self) -> Vec<f64> {
        self.scales.iter().map(|s| scale_to_period(*s) / self.sample_rate).collect()
    }

    pub fn same_layout(&self, other: &WaveletSpectrum) -> bool {
        self.n_samples == other.n_samples && self.scales == other.scales
    }
}

/// Fourier period, in samples, of a Morlet scale.
pub fn scale_to_period(scale: f64) -> f64 {
    4.0 * PI * scale / (MORLET_OMEGA0 + (2.0 + MORLET_OMEGA0 * MORLET_OMEGA0).sqrt())
}

pub fn period_to_scale(period: f64) -> f64 {
    period * (MORLET_OMEGA0 + (2.0 + MORLET_OMEGA0 * MORLET_OMEGA0).sqrt()) / (4.0 * PI)
}

/// Log-spaced scale bank, 8 voices per octave, covering periods from 4 samples
/// to three times the series length.
pub fn default_scales(n_samples: usize) -> Vec<f64> {
    scales_for_periods(4.0, 3.0 * n_samples as f64, VOICES_PER_OCTAVE)
}

pub fn scales_for_periods(min_period: f64, max_period: f64, voices_per_octave: f64) -> Vec<f64> {
    let s0 = period_to_scale(min_period);
    let s1 = period_to_scale(max_period);
    if !(s1 > s0) {
        return vec![s0];
    }
    let n = (voices_per_octave * (s1 / s0).log2()).floor() as usize;
    (0..=n).map(|j| s0 * 2f64.powf(j as f64 / voices_per_octave)).collect()
}

fn morlet_hat(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else {
        PI.powf(-0.25) * (-(u - MORLET_OMEGA0).powi(2) / 2.0).exp()
    }
}

/// `∫₀^∞ ψ̂(u) / u du` by composite Simpson on the region where the integrand is non-negligible.
fn admissibility_integral() -> f64 {
    let (lo, hi) = (1e-6, MORLET_OMEGA0 + 14.0);
    let n = 20_000;
    let h = (hi - lo) / n as f64;
    let f = |u: f64| morlet_hat(u) / u;
    let mut acc = f(lo) + f(hi);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(lo + i as f64 * h);
    }
    acc * h / 3.0
}

/// One period of the whole-sample symmetric extension: x₀ … x_{n−1} x_{n−1} … x₀.
/// Circular convolution over it equals reflection padding of unlimited length.
fn symmetric_period(x: &[f64]) -> Vec<f64> {
    x.iter().chain(x.iter().rev()).copied().collect()
}

fn validate(signal: &[f64], scales: &[f64]) -> Result<()> {
    if scales.is_empty() {
        return Err(Error::EmptyScales);
    }
    if signal.len() < 4 {
        return Err(invalid("signal", "need at least 4 samples"));
    }
    if signal.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    let top = 4.0 * signal.len() as f64;
    if scales.iter().any(|s| !(*s > 1.0 && *s < top)) {
        return Err(invalid("scales", format!("every scale must lie in (1, {top})")));
    }
    if scales.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("scales", "must be strictly increasing"));
    }
    Ok(())
}

/// Reusable FFT plans for one signal length and scale bank.
pub struct CwtPlan {
    scales: Vec<f64>,
    n_samples: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl CwtPlan {
    pub fn new(n_samples: usize, scales: &[f64]) -> Self {
        let len = 2 * n_samples;
        let mut planner = FftPlanner::new();
        Self {
            scales: scales.to_vec(),
            n_samples,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    pub fn transform(&self, signal: &[f64], sample_rate: f64) -> Result<WaveletSpectrum> {
        validate(signal, &self.scales)?;
        if signal.len() != self.n_samples {
            return Err(Error::LengthMismatch(format!(
                "plan built for {} samples, got {}",
                self.n_samples,
                signal.len()
            )));
        }
        let n = self.n_samples;
        let len = 2 * n;
        let mean = signal.iter().sum::<f64>() / n as f64;

        let mut spectrum: Vec<Complex64> = symmetric_period(signal).into_iter().map(|v| Complex64::new(v - mean, 0.0)).collect();
        self.forward.process(&mut spectrum);

        let mut out = WaveletSpectrum::zeros(self.scales.clone(), n, sample_rate);
        let mut work = vec![Complex64::new(0.0, 0.0); len];
        let inv_len = 1.0 / len as f64;
        for (j, &s) in self.scales.iter().enumerate() {
            let norm = (2.0 * PI * s).sqrt() * inv_len;
            // only positive frequencies k in 1..=len/2 contribute
            for (k, w) in work.iter_mut().enumerate() {
                let omega = 2.0 * PI * k as f64 / len as f64;
                *w = if k >= 1 && 2 * k <= len {
                    spectrum[k] * (norm * morlet_hat(s * omega))
                } else {
                    Complex64::new(0.0, 0.0)
                };
            }
            self.inverse.process(&mut work);
            out.row_mut(j).copy_from_slice(&work[..n]);
        }
        Ok(out)
    }
}

pub fn cwt(signal: &[f64], scales: &[f64], sample_rate: f64) -> Result<WaveletSpectrum> {
    validate(signal, scales)?;
    CwtPlan::new(signal.len(), scales).transform(signal, sample_rate)
}

/// Per-scale quadrature weights in log2(scale).
fn log_scale_weights(scales: &[f64]) -> Vec<f64> {
    let l: Vec<f64> = scales.iter().map(|s| s.log2()).collect();
    let m = l.len();
    if m == 1 {
        return vec![1.0];
    }
    (0..m)
        .map(|j| match j {
            0 => l[1] - l[0],
            _ if j == m - 1 => l[m - 1] - l[m - 2],
            _ => (l[j + 1] - l[j - 1]) / 2.0,
        })
        .collect()
}

/// Zero-mean time series reconstructed from a Morlet spectrum.
pub fn icwt(spectrum: &WaveletSpectrum) -> Vec<f64> {
    let n = spectrum.n_samples;
    let mut out = vec![0.0; n];
    if spectrum.scales.is_empty() {
        return out;
    }
    let gain = 2.0 * LN_2 / ((2.0 * PI).sqrt() * admissibility_integral());
    let weights = log_scale_weights(&spectrum.scales);
    for ((row, &s), &w) in spectrum.rows().zip(&spectrum.scales).zip(&weights) {
        let c = gain * w / s.sqrt();
        for (o, z) in out.iter_mut().zip(row) {
            *o += c * z.re;
        }
    }
    out
}
