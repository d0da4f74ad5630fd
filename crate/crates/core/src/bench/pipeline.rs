//! One survey through clean → detect → localize → score.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dsp::lowpass;
use crate::error::{invalid, Result};
use crate::localize::{cluster_flagged, hard_threshold_detector, median, score_detections, DetectionCluster, HdbscanParams, Scoring, MATCH_RADIUS};
use crate::metrics::pearson;
use crate::rude::{confidence, ConfidenceSeries};
use crate::scenario::{MineSource, SurveyRecord};
use crate::waicup::Canceller;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Cleaner {
    #[serde(rename = "waicup")]
    WaicUp,
    #[serde(rename = "lowpass")]
    LowPass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detector {
    Rude,
    Threshold,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodCombo {
    pub cleaner: Cleaner,
    pub detector: Detector,
    /// Confidence threshold for RUDE, nT limit for thresholding.
    pub detector_param: f64,
}

impl MethodCombo {
    pub fn new(cleaner: Cleaner, detector: Detector, detector_param: f64) -> Result<Self> {
        if !(detector_param > 0.0 && detector_param.is_finite()) {
            return Err(invalid("detector_param", "must be positive"));
        }
        Ok(Self {
            cleaner,
            detector,
            detector_param,
        })
    }

    /// The 2×2 method matrix in Table 1 order.
    pub fn matrix(rude_threshold: f64, nt_limit: f64) -> Result<Vec<Self>> {
        [
            (Cleaner::WaicUp, Detector::Rude, rude_threshold),
            (Cleaner::WaicUp, Detector::Threshold, nt_limit),
            (Cleaner::LowPass, Detector::Rude, rude_threshold),
            (Cleaner::LowPass, Detector::Threshold, nt_limit),
        ]
        .into_iter()
        .map(|(c, d, p)| Self::new(c, d, p))
        .collect()
    }
}

impl fmt::Display for MethodCombo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self.cleaner {
            Cleaner::WaicUp => "waicup",
            Cleaner::LowPass => "lowpass",
        };
        let d = match self.detector {
            Detector::Rude => "rude",
            Detector::Threshold => "threshold",
        };
        write!(f, "{c}_{d}")
    }
}

/// Processing knobs shared by every combo.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Hz
    pub lowpass_cutoff: f64,
    pub rude_windows: Vec<usize>,
    pub rude_nu: f64,
    pub hdbscan: HdbscanParams,
    /// m
    pub match_radius: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            lowpass_cutoff: 0.5,
            rude_windows: vec![64, 128, 256, 512, 1024],
            rude_nu: 0.1,
            hdbscan: HdbscanParams::default(),
            match_radius: MATCH_RADIUS,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lowpass_cutoff > 0.0) {
            return Err(invalid("lowpass_cutoff", "must be positive"));
        }
        if self.rude_windows.is_empty() || self.rude_windows.iter().any(|w| *w < 2) {
            return Err(invalid("rude_windows", "need at least one window of 2 or more samples"));
        }
        if !(self.rude_nu > 0.0 && self.rude_nu <= 1.0) {
            return Err(invalid("rude_nu", "must lie in (0, 1]"));
        }
        if self.hdbscan.min_cluster_size < 2 {
            return Err(invalid("min_cluster_size", "must be at least 2"));
        }
        if !(self.match_radius > 0.0) {
            return Err(invalid("match_radius", "must be positive"));
        }
        Ok(())
    }
}

/// Per-axis cleaned sensor-1 field.
///
/// WAIC-UP uses both magnetometers; the low-pass baseline filters sensor 1 alone.
pub fn clean_record(record: &SurveyRecord, cleaner: Cleaner, cfg: &PipelineConfig) -> Result<[Vec<f64>; 3]> {
    let fs = record.sample_rate();
    let canceller = (cleaner == Cleaner::WaicUp).then(|| Canceller::new(record.len(), fs));
    let mut out: [Vec<f64>; 3] = Default::default();
    for (ax, slot) in out.iter_mut().enumerate() {
        let b1 = SurveyRecord::axis(&record.b1, ax);
        *slot = match &canceller {
            Some(c) => c.clean(&b1, &SurveyRecord::axis(&record.b2, ax))?.0,
            None => lowpass(&b1, cfg.lowpass_cutoff, fs)?,
        };
    }
    Ok(out)
}

pub fn magnitude(axes: &[Vec<f64>; 3]) -> Vec<f64> {
    (0..axes[0].len())
        .map(|i| (axes[0][i] * axes[0][i] + axes[1][i] * axes[1][i] + axes[2][i] * axes[2][i]).sqrt())
        .collect()
}

/// Magnitude with its median removed.
pub fn detection_signal(axes: &[Vec<f64>; 3]) -> Vec<f64> {
    let mag = magnitude(axes);
    let m = median(&mag).unwrap_or(0.0);
    mag.into_iter().map(|v| v - m).collect()
}

/// Detections for one combo on an already-cleaned signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub flags: Vec<bool>,
    pub confidence: Option<ConfidenceSeries>,
    pub clusters: Vec<DetectionCluster>,
}

pub fn detect(record: &SurveyRecord, signal: &[f64], combo: &MethodCombo, cfg: &PipelineConfig) -> Result<Detection> {
    let (flags, conf) = match combo.detector {
        Detector::Rude => {
            let c = confidence(signal, &cfg.rude_windows, cfg.rude_nu)?;
            (c.scores.iter().map(|s| *s >= combo.detector_param).collect(), Some(c))
        }
        Detector::Threshold => (hard_threshold_detector(signal, combo.detector_param)?, None),
    };
    let clusters = cluster_flagged(record, &flags, &cfg.hdbscan)?;
    Ok(Detection {
        flags,
        confidence: conf,
        clusters,
    })
}

/// Correlation of the cleaned magnitude with the true sensor-1 magnitude;
/// `None` when either is constant.
pub fn magnitude_rho(cleaned: &[Vec<f64>; 3], record: &SurveyRecord) -> Result<Option<f64>> {
    match pearson(&magnitude(cleaned), &SurveyRecord::magnitude(&record.truth1)) {
        Ok(r) => Ok(Some(r)),
        Err(crate::Error::ZeroVariance) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Outcome of one combo on one survey.
#[derive(Debug, Clone, PartialEq)]
pub struct ComboOutcome {
    pub combo: MethodCombo,
    pub rho: Option<f64>,
    pub detection: Detection,
    pub scoring: Scoring,
}

/// Runs every combo on one record; each cleaner runs once and is shared.
pub fn run_combos(record: &SurveyRecord, mines: &[MineSource], combos: &[MethodCombo], cfg: &PipelineConfig) -> Result<Vec<ComboOutcome>> {
    let mut cache: Vec<(Cleaner, Vec<f64>, Option<f64>)> = Vec::new();
    let mut out = Vec::with_capacity(combos.len());
    for combo in combos {
        let idx = match cache.iter().position(|(c, _, _)| *c == combo.cleaner) {
            Some(i) => i,
            None => {
                let cleaned = clean_record(record, combo.cleaner, cfg)?;
                let rho = magnitude_rho(&cleaned, record)?;
                cache.push((combo.cleaner, detection_signal(&cleaned), rho));
                cache.len() - 1
            }
        };
        let (_, signal, rho) = &cache[idx];
        let detection = detect(record, signal, combo, cfg)?;
        let scoring = score_detections(&detection.clusters, mines, cfg.match_radius)?;
        out.push(ComboOutcome {
            combo: *combo,
            rho: *rho,
            detection,
            scoring,
        });
    }
    Ok(out)
}
