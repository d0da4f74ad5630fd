//! Point-dipole magnetostatics and the chirped motor interference model.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::vec3::Vec3;

use super::{Motor, MotorComponent};

/// μ₀/4π in T·m/A, scaled to nT.
const MU0_OVER_4PI_NT: f64 = 1e-7 * 1e9;

/// Observer closer than this to the source is treated as coincident.
const MIN_SEPARATION_M: f64 = 1e-12;

/// Field of a point dipole `moment` (A·m²) at `source_pos`, evaluated at `obs_pos`, in nT.
pub fn dipole_field(moment: Vec3, source_pos: Vec3, obs_pos: Vec3) -> Result<Vec3> {
    let r = obs_pos - source_pos;
    let dist = r.norm();
    if !(dist > MIN_SEPARATION_M) {
        return Err(Error::CoincidentPoints);
    }
    let r_hat = r * (1.0 / dist);
    let scale = MU0_OVER_4PI_NT / (dist * dist * dist);
    Ok((r_hat * (3.0 * moment.dot(r_hat)) - moment) * scale)
}

impl MotorComponent {
    /// Instantaneous frequency at time `t` of a flight lasting `duration` seconds.
    pub fn frequency_at(&self, t: f64, duration: f64) -> f64 {
        self.base_frequency * (1.0 + (self.chirp_factor - 1.0) * t / duration)
    }

    /// Oscillator phase, the time integral of `frequency_at` plus the initial phase.
    pub fn phase_at(&self, t: f64, duration: f64) -> f64 {
        let cycles = self.base_frequency * (t + (self.chirp_factor - 1.0) * t * t / (2.0 * duration));
        2.0 * PI * cycles + self.phase
    }

    /// Time-varying dipole moment in A·m².
    pub fn moment_at(&self, t: f64, duration: f64) -> Vec3 {
        self.axis * (self.moment_amplitude * self.phase_at(t, duration).sin())
    }
}

/// Summed field of one motor's three interference components at a sensor mounted
/// at `obs_offset` from the UAV reference point.
pub fn motor_field(motor: &Motor, uav_pos: Vec3, obs_offset: Vec3, t: f64, duration: f64) -> Result<Vec3> {
    let source = uav_pos + motor.offset;
    let obs = uav_pos + obs_offset;
    let mut total = Vec3::ZERO;
    for component in &motor.components {
        total += dipole_field(component.moment_at(t, duration), source, obs)?;
    }
    Ok(total)
}
