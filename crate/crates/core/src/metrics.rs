//! Detection scores over confusion counts and the Pearson correlation.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::localize::ConfusionCounts;

/// A ratio with its zero-denominator flag. Degenerate ratios are reported as 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub value: f64,
    pub degenerate: bool,
}

impl Score {
    fn ratio(num: usize, den: usize) -> Self {
        if den == 0 {
            Self { value: 0.0, degenerate: true }
        } else {
            Self {
                value: num as f64 / den as f64,
                degenerate: false,
            }
        }
    }
}

pub fn precision(c: &ConfusionCounts) -> Score {
    Score::ratio(c.tp, c.tp + c.fp)
}

pub fn recall(c: &ConfusionCounts) -> Score {
    Score::ratio(c.tp, c.tp + c.fn_)
}

/// Harmonic mean of the two rates; degenerate when both are zero.
pub fn f1_from(p: f64, r: f64) -> Score {
    if p + r == 0.0 {
        Score { value: 0.0, degenerate: true }
    } else {
        Score {
            value: 2.0 * p * r / (p + r),
            degenerate: false,
        }
    }
}

pub fn f1(c: &ConfusionCounts) -> Score {
    f1_from(precision(c).value, recall(c).value)
}

/// Critical success index.
pub fn threat_score(c: &ConfusionCounts) -> Score {
    Score::ratio(c.tp, c.tp + c.fn_ + c.fp)
}

/// Sample correlation coefficient. Errors on mismatched or short input, and
/// returns `Error::ZeroVariance` when either series is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(format!("{} and {} values", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(crate::error::invalid("x", "at least two values are required"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Scores for one method over a set of simulations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub counts: ConfusionCounts,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub threat_score: f64,
    /// Mean of the per-simulation correlations; `None` when none were defined.
    pub pearson_rho: Option<f64>,
    pub localization_errors: Vec<f64>,
    /// Names of the scores that hit a zero denominator.
    pub degenerate: Vec<String>,
}

impl MetricsReport {
    /// Pooled counts, per-simulation ρ values, and all true-positive errors.
    pub fn from_parts(counts: ConfusionCounts, rhos: &[f64], localization_errors: Vec<f64>) -> Self {
        let p = precision(&counts);
        let r = recall(&counts);
        let f = f1_from(p.value, r.value);
        let t = threat_score(&counts);
        let degenerate = [("precision", p), ("recall", r), ("f1", f), ("threat_score", t)]
            .into_iter()
            .filter(|(_, s)| s.degenerate)
            .map(|(n, _)| n.to_string())
            .collect();
        Self {
            counts,
            precision: p.value,
            recall: r.value,
            f1: f.value,
            threat_score: t.value,
            pearson_rho: (!rhos.is_empty()).then(|| rhos.iter().sum::<f64>() / rhos.len() as f64),
            localization_errors,
            degenerate,
        }
    }

    pub fn median_error(&self) -> Option<f64> {
        crate::localize::median(&self.localization_errors)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Table 1 layout: one row per method.
pub fn write_table1_csv<W: Write>(mut out: W, rows: &[(String, MetricsReport)]) -> Result<()> {
    writeln!(out, "method,tp,fp,fn,precision,recall,f1,threat_score,pearson_rho,median_error_m")?;
    for (name, r) in rows {
        let opt = |v: Option<f64>| v.map_or(String::new(), |v| format!("{v:.4}"));
        writeln!(
            out,
            "{name},{},{},{},{:.4},{:.4},{:.4},{:.4},{},{}",
            r.counts.tp,
            r.counts.fp,
            r.counts.fn_,
            r.precision,
            r.recall,
            r.f1,
            r.threat_score,
            opt(r.pearson_rho),
            opt(r.median_error()),
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cc(tp: usize, fp: usize, fn_: usize) -> ConfusionCounts {
        ConfusionCounts { tp, fp, fn_ }
    }

    #[test]
    fn zero_denominators_are_flagged() {
        let c = cc(0, 0, 0);
        assert_eq!(precision(&c), Score { value: 0.0, degenerate: true });
        assert!(f1(&c).degenerate);
        let r = MetricsReport::from_parts(c, &[], vec![]);
        assert_eq!(r.degenerate, ["precision", "recall", "f1", "threat_score"]);
        assert_eq!(r.pearson_rho, None);
    }

    #[test]
    fn perfect_detection() {
        let c = cc(7, 0, 0);
        assert_eq!(precision(&c).value, 1.0);
        assert_eq!(recall(&c).value, 1.0);
        assert_eq!(f1(&c).value, 1.0);
        assert_eq!(threat_score(&c).value, 1.0);
        assert_eq!(threat_score(&cc(0, 3, 2)).value, 0.0);
    }

    #[test]
    fn pearson_basics() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v| -3.0 * v + 1.0).collect();
        assert!((pearson(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&x, &y).unwrap() + 1.0).abs() < 1e-15);
        assert!(matches!(pearson(&x, &[1.0; 4]), Err(Error::ZeroVariance)));
        assert!(pearson(&x, &x[..3]).is_err());
    }

    #[test]
    fn table_csv() {
        let r = MetricsReport::from_parts(cc(2, 2, 0), &[0.5], vec![0.25]);
        let mut buf = Vec::new();
        write_table1_csv(&mut buf, &[("waicup_rude".into(), r)]).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().nth(1).unwrap(), "waicup_rude,2,2,0,0.5000,1.0000,0.6667,0.5000,0.5000,0.2500");
    }
}
