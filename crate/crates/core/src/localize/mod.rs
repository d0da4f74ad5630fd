//! Flagged samples to landmine position estimates, and scoring against truth.

mod hdbscan;

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scenario::{MineSource, SurveyRecord};
use crate::Vec3;

pub use hdbscan::{hdbscan, hdbscan_with, Clustering, HdbscanParams};

/// Detections within this XY distance of a mine count as hits.
pub const MATCH_RADIUS: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionCluster {
    /// Centroid of the members' sensor-1 XY positions, z = 0.
    pub center: Vec3,
    pub member_count: usize,
    pub member_indices: Vec<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl std::ops::Add for ConfusionCounts {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
        }
    }
}

impl std::iter::Sum for ConfusionCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), |a, b| a + b)
    }
}

/// Outcome of matching clusters to mines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scoring {
    pub counts: ConfusionCounts,
    /// Nearest mine within the radius, per cluster.
    pub matched: Vec<Option<usize>>,
    /// XY distance to the nearest mine for every true positive, in cluster order.
    pub errors: Vec<f64>,
}

/// Flags samples whose deviation from the series median exceeds `limit`.
pub fn hard_threshold_detector(cleaned: &[f64], limit: f64) -> Result<Vec<bool>> {
    if !(limit > 0.0) {
        return Err(invalid("limit", "must be positive"));
    }
    let m = median(cleaned).unwrap_or(0.0);
    Ok(cleaned.iter().map(|v| (v - m).abs() > limit).collect())
}

/// Median of a series (mean of the middle pair for even lengths).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[mid] } else { 0.5 * (v[mid - 1] + v[mid]) })
}

/// Clusters the sensor-1 ground positions of samples with `scores[i] ≥ threshold`.
pub fn detect_positions(record: &SurveyRecord, scores: &[f64], threshold: f64, params: &HdbscanParams) -> Result<Vec<DetectionCluster>> {
    if scores.len() != record.len() {
        return Err(Error::LengthMismatch(format!("{} scores for {} samples", scores.len(), record.len())));
    }
    let flags: Vec<bool> = scores.iter().map(|s| *s >= threshold).collect();
    cluster_flagged(record, &flags, params)
}

/// Clusters the sensor-1 ground positions of flagged samples.
pub fn cluster_flagged(record: &SurveyRecord, flags: &[bool], params: &HdbscanParams) -> Result<Vec<DetectionCluster>> {
    if flags.len() != record.len() {
        return Err(Error::LengthMismatch(format!("{} flags for {} samples", flags.len(), record.len())));
    }
    let selected: Vec<usize> = flags.iter().enumerate().filter(|(_, f)| **f).map(|(i, _)| i).collect();
    let points: Vec<[f64; 2]> = selected.iter().map(|&i| [record.positions1[i].x, record.positions1[i].y]).collect();
    let clustering = hdbscan_with(&points, params)?;
    Ok((0..clustering.n_clusters)
        .map(|c| {
            let members: Vec<usize> = clustering.members(c);
            let (mut sx, mut sy) = (0.0, 0.0);
            for &m in &members {
                sx += points[m][0];
                sy += points[m][1];
            }
            let k = members.len() as f64;
            DetectionCluster {
                center: Vec3::new(sx / k, sy / k, 0.0),
                member_count: members.len(),
                member_indices: members.iter().map(|&m| selected[m]).collect(),
            }
        })
        .collect())
}

/// Per-cluster rule: a cluster within `radius` of any mine is a true
/// positive, otherwise a false positive. Mines with no cluster in range are
/// false negatives. Depth is ignored.
pub fn score_detections(clusters: &[DetectionCluster], mines: &[MineSource], radius: f64) -> Result<Scoring> {
    if !(radius > 0.0) {
        return Err(invalid("radius", "must be positive"));
    }
    let mut counts = ConfusionCounts::default();
    let mut matched = Vec::with_capacity(clusters.len());
    let mut errors = Vec::new();
    let mut hit = vec![false; mines.len()];
    for c in clusters {
        let nearest = mines
            .iter()
            .enumerate()
            .map(|(i, m)| (i, c.center.distance_xy(m.position)))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match nearest {
            Some((i, d)) if d <= radius => {
                counts.tp += 1;
                errors.push(d);
                matched.push(Some(i));
            }
            _ => {
                counts.fp += 1;
                matched.push(None);
            }
        }
        for (h, m) in hit.iter_mut().zip(mines) {
            if c.center.distance_xy(m.position) <= radius {
                *h = true;
            }
        }
    }
    counts.fn_ = hit.iter().filter(|h| !**h).count();
    Ok(Scoring { counts, matched, errors })
}

/// Detections CSV: `cluster_id,x,y,member_count,matched_mine_id,error_m`,
/// with the last two blank for unmatched clusters.
pub fn write_detections_csv<W: Write>(mut out: W, clusters: &[DetectionCluster], scoring: Option<&Scoring>, mines: &[MineSource]) -> Result<()> {
    writeln!(out, "cluster_id,x,y,member_count,matched_mine_id,error_m")?;
    for (id, c) in clusters.iter().enumerate() {
        let m = scoring.and_then(|s| s.matched.get(id).copied().flatten());
        let (mine, err) = match m {
            Some(i) => (i.to_string(), c.center.distance_xy(mines[i].position).to_string()),
            None => (String::new(), String::new()),
        };
        writeln!(out, "{id},{},{},{},{mine},{err}", c.center.x, c.center.y, c.member_count)?;
    }
    Ok(())
}
