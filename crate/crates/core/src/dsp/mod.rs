//! Wavelet transform pair and the baseline low-pass filter.

mod cwt;
mod filter;

pub use cwt::{cwt, default_scales, icwt, period_to_scale, scale_to_period, scales_for_periods, CwtPlan, WaveletSpectrum, MORLET_OMEGA0};
pub use filter::{butterworth_gain, lowpass};
