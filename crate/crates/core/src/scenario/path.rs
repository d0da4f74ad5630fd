use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::vec3::Vec3;

/// Constant-altitude, constant-speed polyline flown by the UAV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlightPath {
    pub waypoints: Vec<Vec3>,
    /// m/s
    pub speed: f64,
    /// Hz
    pub sample_rate: f64,
    /// m
    pub altitude: f64,
}

impl FlightPath {
    pub fn validate(&self) -> Result<()> {
        if !(self.speed > 0.0) {
            return Err(invalid("speed", "must be positive"));
        }
        if !(self.sample_rate > 0.0) {
            return Err(invalid("sample_rate", "must be positive"));
        }
        if self.waypoints.len() < 2 {
            return Err(invalid("waypoints", "need at least two"));
        }
        for w in self.waypoints.windows(2) {
            if (w[1] - w[0]).norm() == 0.0 {
                return Err(invalid("waypoints", "consecutive waypoints coincide"));
            }
        }
        if self.waypoints.iter().any(|w| w.z != self.altitude || !w.is_finite()) {
            return Err(invalid("waypoints", "every waypoint must sit at the path altitude"));
        }
        Ok(())
    }

    pub fn length(&self) -> f64 {
        self.waypoints.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    pub fn duration(&self) -> f64 {
        self.length() / self.speed
    }

    /// Samples at t = i / sample_rate for every t strictly before the end of the path.
    pub fn n_samples(&self) -> usize {
        let exact = self.duration() * self.sample_rate;
        let rounded = exact.round();
        if (exact - rounded).abs() < 1e-9 {
            rounded as usize
        } else {
            exact.ceil() as usize
        }
    }

    /// Position along the path at time `t`, clamped to the endpoints.
    pub fn position_at(&self, t: f64) -> Vec3 {
        let mut remaining = (t * self.speed).max(0.0);
        for w in self.waypoints.windows(2) {
            let seg = w[1] - w[0];
            let len = seg.norm();
            if remaining <= len {
                return w[0] + seg * (remaining / len);
            }
            remaining -= len;
        }
        *self.waypoints.last().expect("validated path has waypoints")
    }
}

/// Boustrophedon path of `n_lines` passes parallel to the y axis, spanning a square grid.
pub fn serpentine_path(grid_size: f64, n_lines: usize, altitude: f64, speed: f64, sample_rate: f64) -> Result<FlightPath> {
    if n_lines < 2 {
        return Err(invalid("n_lines", "need at least two passes"));
    }
    for (name, v) in [("grid_size", grid_size), ("altitude", altitude), ("speed", speed), ("sample_rate", sample_rate)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(invalid(name, "must be positive and finite"));
        }
    }
    let spacing = grid_size / (n_lines - 1) as f64;
    let mut waypoints = Vec::with_capacity(2 * n_lines);
    for line in 0..n_lines {
        let x = line as f64 * spacing;
        let (y0, y1) = if line % 2 == 0 { (0.0, grid_size) } else { (grid_size, 0.0) };
        waypoints.push(Vec3::new(x, y0, altitude));
        waypoints.push(Vec3::new(x, y1, altitude));
    }
    let path = FlightPath {
        waypoints,
        speed,
        sample_rate,
        altitude,
    };
    path.validate()?;
    Ok(path)
}
