//! Zero-phase Butterworth low-pass built from second-order sections.

use std::f64::consts::PI;

use crate::error::{invalid, Result};

const ORDER: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Biquad {
    b0: f64,
    b1: f64,
    b2: f64,
    a1: f64,
    a2: f64,
}

impl Biquad {
    fn lowpass(k: f64, q: f64) -> Self {
        let norm = 1.0 / (1.0 + k / q + k * k);
        let b0 = k * k * norm;
        Self {
            b0,
            b1: 2.0 * b0,
            b2: b0,
            a1: 2.0 * (k * k - 1.0) * norm,
            a2: (1.0 - k / q + k * k) * norm,
        }
    }

    /// Transposed direct form II, state initialized to the DC steady state of `x[0]`.
    fn run(&self, x: &mut [f64]) {
        let Some(&first) = x.first() else { return };
        let mut z1 = (1.0 - self.b0) * first;
        let mut z2 = (self.b2 - self.a2) * first;
        for v in x.iter_mut() {
            let input = *v;
            let y = self.b0 * input + z1;
            z1 = self.b1 * input - self.a1 * y + z2;
            z2 = self.b2 * input - self.a2 * y;
            *v = y;
        }
    }
}

fn design(cutoff: f64, sample_rate: f64) -> Vec<Biquad> {
    let k = (PI * cutoff / sample_rate).tan();
    (0..ORDER / 2)
        .map(|i| {
            let q = 1.0 / (2.0 * ((2 * i + 1) as f64 * PI / (2 * ORDER) as f64).sin());
            Biquad::lowpass(k, q)
        })
        .collect()
}

/// Analytic magnitude of one pass of the digital filter at `freq`.
pub fn butterworth_gain(freq: f64, cutoff: f64, sample_rate: f64) -> f64 {
    let ratio = (PI * freq / sample_rate).tan() / (PI * cutoff / sample_rate).tan();
    1.0 / (1.0 + ratio.powi(2 * ORDER as i32)).sqrt()
}

/// Forward-backward 4th-order Butterworth low-pass with odd-reflection edge padding.
pub fn lowpass(signal: &[f64], cutoff: f64, sample_rate: f64) -> Result<Vec<f64>> {
    if !(sample_rate > 0.0 && sample_rate.is_finite()) {
        return Err(invalid("sample_rate", "must be positive"));
    }
    if !(cutoff > 0.0 && cutoff < sample_rate / 2.0) {
        return Err(invalid("cutoff", format!("{cutoff} Hz not in (0, {}) Hz", sample_rate / 2.0)));
    }
    let n = signal.len();
    if n < 2 {
        return Ok(signal.to_vec());
    }
    let sections = design(cutoff, sample_rate);
    let pad = ((3.0 * sample_rate / cutoff).ceil() as usize).min(n - 1);

    let (first, last) = (signal[0], signal[n - 1]);
    let mut work = Vec::with_capacity(n + 2 * pad);
    work.extend((1..=pad).rev().map(|i| 2.0 * first - signal[i]));
    work.extend_from_slice(signal);
    work.extend((1..=pad).map(|i| 2.0 * last - signal[n - 1 - i]));

    for s in &sections {
        s.run(&mut work);
    }
    work.reverse();
    for s in &sections {
        s.run(&mut work);
    }
    work.reverse();
    Ok(work[pad..pad + n].to_vec())
}
