use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

use super::{build_trajectory, median_heuristic_gamma, ocsvm_fit_predict, pca2};

/// Per-sample anomaly confidence from multi-window voting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceSeries {
    pub scores: Vec<f64>,
    pub window_lengths: Vec<usize>,
}

impl ConfidenceSeries {
    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// Indices with score ≥ `threshold`.
    pub fn above(&self, threshold: f64) -> Vec<usize> {
        self.scores.iter().enumerate().filter(|(_, s)| **s >= threshold).map(|(i, _)| i).collect()
    }

    /// Writes `t,score` rows at the given sample rate.
    pub fn write_csv<W: Write>(&self, mut out: W, sample_rate: f64) -> Result<()> {
        writeln!(out, "t,score")?;
        for (i, s) in self.scores.iter().enumerate() {
            writeln!(out, "{},{s}", i as f64 / sample_rate)?;
        }
        Ok(())
    }
}

/// Interval labels spread back to samples for one window length:
/// `Some(flag)` where the window covers the sample, `None` in the remainder.
pub fn window_labels(series: &[f64], window: usize, nu: f64) -> Result<Vec<Option<bool>>> {
    let matrix = build_trajectory(series, window)?;
    let reduced = pca2(&matrix)?;
    let flags = match median_heuristic_gamma(&reduced.points) {
        Some(gamma) => ocsvm_fit_predict(&reduced.points, nu, gamma)?,
        None => vec![false; reduced.points.len()],
    };
    let mut out = vec![None; series.len()];
    for (col, flag) in flags.into_iter().enumerate() {
        out[matrix.span(col)].fill(Some(flag));
    }
    Ok(out)
}

pub fn confidence(series: &[f64], window_lengths: &[usize], nu: f64) -> Result<ConfidenceSeries> {
    if window_lengths.is_empty() {
        return Err(invalid("window_lengths", "at least one window length is required"));
    }
    let per_window: Vec<Vec<Option<bool>>> = window_lengths.par_iter().map(|&w| window_labels(series, w, nu)).collect::<Result<_>>()?;
    let scores = (0..series.len())
        .map(|i| {
            let (mut votes, mut covered) = (0u32, 0u32);
            for labels in &per_window {
                if let Some(flag) = labels[i] {
                    covered += 1;
                    votes += u32::from(flag);
                }
            }
            if covered == 0 {
                0.0
            } else {
                f64::from(votes) / f64::from(covered)
            }
        })
        .collect();
    Ok(ConfidenceSeries {
        scores,
        window_lengths: window_lengths.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_scores_zero() {
        let c = confidence(&[7.0; 2000], &[16, 32, 64], 0.1).unwrap();
        assert_eq!(c.len(), 2000);
        assert!(c.scores.iter().all(|s| *s == 0.0));
    }

    #[test]
    fn uncovered_tail_scores_zero() {
        let s: Vec<f64> = (0..1000).map(|i| ((i * 37) % 11) as f64).collect();
        let c = confidence(&s, &[300], 0.5).unwrap();
        assert!(c.scores[900..].iter().all(|v| *v == 0.0));
    }

    #[test]
    fn csv_layout() {
        let c = ConfidenceSeries {
            scores: vec![0.0, 0.6],
            window_lengths: vec![4],
        };
        let mut buf = Vec::new();
        c.write_csv(&mut buf, 10.0).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,score\n0,0\n0.1,0.6\n");
        assert_eq!(c.above(0.5), vec![1]);
    }

    #[test]
    fn rejects_empty_window_set() {
        assert!(confidence(&[0.0; 100], &[], 0.1).is_err());
    }
}
