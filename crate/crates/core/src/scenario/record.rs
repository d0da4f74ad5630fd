use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vec3::Vec3;

const HEADER: &str = "t,x1,y1,z1,b1x,b1y,b1z,b2x,b2y,b2z,tx,ty,tz";
const SENSOR2_DELTA_KEY: &str = "# sensor2_delta=";

/// Time-aligned sensor positions and readings for one survey.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SurveyRecord {
    /// s
    pub times: Vec<f64>,
    /// m, world frame
    pub positions1: Vec<Vec3>,
    pub positions2: Vec<Vec3>,
    /// nT
    pub b1: Vec<Vec3>,
    pub b2: Vec<Vec3>,
    /// Mines plus background at sensor 1, free of interference and noise.
    pub truth1: Vec<Vec3>,
}

impl SurveyRecord {
    pub fn with_capacity(n: usize) -> Self {
        Self {
            times: Vec::with_capacity(n),
            positions1: Vec::with_capacity(n),
            positions2: Vec::with_capacity(n),
            b1: Vec::with_capacity(n),
            b2: Vec::with_capacity(n),
            truth1: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn sample_rate(&self) -> f64 {
        if self.times.len() < 2 {
            return f64::NAN;
        }
        (self.times.len() - 1) as f64 / (self.times[self.times.len() - 1] - self.times[0])
    }

    /// One vector component of sensor 1, sensor 2 or truth as a scalar series.
    pub fn axis(series: &[Vec3], axis: usize) -> Vec<f64> {
        series.iter().map(|v| v.component(axis)).collect()
    }

    pub fn magnitude(series: &[Vec3]) -> Vec<f64> {
        series.iter().map(|v| v.norm()).collect()
    }

    /// Writes comment lines (each prefixed with `# `), then the CSV header and rows.
    pub fn write_csv<W: Write>(&self, mut out: W, comments: &[String]) -> Result<()> {
        for c in comments {
            writeln!(out, "# {c}")?;
        }
        if let (Some(p1), Some(p2)) = (self.positions1.first(), self.positions2.first()) {
            let d = *p2 - *p1;
            writeln!(out, "{SENSOR2_DELTA_KEY}{},{},{}", d.x, d.y, d.z)?;
        }
        writeln!(out, "{HEADER}")?;
        for i in 0..self.len() {
            let (p, a, b, t) = (self.positions1[i], self.b1[i], self.b2[i], self.truth1[i]);
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                self.times[i], p.x, p.y, p.z, a.x, a.y, a.z, b.x, b.y, b.z, t.x, t.y, t.z
            )?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut record = SurveyRecord::default();
        let mut delta = Vec3::ZERO;
        let mut seen_header = false;
        for (idx, line) in input.lines().enumerate() {
            let line = line?;
            let line_no = idx + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(rest) = trimmed.strip_prefix(SENSOR2_DELTA_KEY) {
                let v = parse_fields(rest, 3, line_no)?;
                delta = Vec3::new(v[0], v[1], v[2]);
                continue;
            }
            if trimmed.starts_with('#') {
                continue;
            }
            if !seen_header {
                if trimmed != HEADER {
                    return Err(Error::Csv {
                        line: line_no,
                        reason: format!("expected header `{HEADER}`"),
                    });
                }
                seen_header = true;
                continue;
            }
            let v = parse_fields(trimmed, 13, line_no)?;
            let p1 = Vec3::new(v[1], v[2], v[3]);
            record.times.push(v[0]);
            record.positions1.push(p1);
            record.positions2.push(p1 + delta);
            record.b1.push(Vec3::new(v[4], v[5], v[6]));
            record.b2.push(Vec3::new(v[7], v[8], v[9]));
            record.truth1.push(Vec3::new(v[10], v[11], v[12]));
        }
        if !seen_header {
            return Err(Error::Csv {
                line: 0,
                reason: "missing header".into(),
            });
        }
        Ok(record)
    }
}

fn parse_fields(text: &str, expected: usize, line: usize) -> Result<Vec<f64>> {
    let values: Vec<f64> = text
        .split(',')
        .map(|f| f.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Csv { line, reason: e.to_string() })?;
    if values.len() != expected {
        return Err(Error::Csv {
            line,
            reason: format!("expected {expected} fields, found {}", values.len()),
        });
    }
    Ok(values)
}
