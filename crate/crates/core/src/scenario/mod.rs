//! Randomized survey scenarios and the forward model for both magnetometers.
//!
//! A [`Scenario`] fixes everything that determines a survey: buried mines,
//! the four motors and their chirped interference components, the flight
//! path, sensor mounting, noise level, background field and the seed that
//! drives the sensor noise. [`simulate`] turns it into a [`SurveyRecord`].

mod field;
mod path;
mod record;
mod simulate;

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::vec3::Vec3;

pub use field::{dipole_field, motor_field};
pub use path::{serpentine_path, FlightPath};
pub use record::SurveyRecord;
pub use simulate::simulate;

/// Magnetic moment of an M19 minimum-metal anti-tank mine, A·m².
pub const M19_MOMENT: Vec3 = Vec3::new(-0.326, 0.087, -0.338);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MineSource {
    /// z ≤ 0 is burial depth below the ground plane.
    pub position: Vec3,
    pub moment: Vec3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotorKind {
    MechanicalRotation,
    PermanentMagnet,
    InducedField,
}

impl MotorKind {
    pub const ALL: [MotorKind; 3] = [MotorKind::MechanicalRotation, MotorKind::PermanentMagnet, MotorKind::InducedField];

    pub fn base_frequency(self) -> f64 {
        match self {
            MotorKind::MechanicalRotation => 0.055,
            MotorKind::PermanentMagnet => 0.39,
            MotorKind::InducedField => 2.0,
        }
    }
}

/// How motor dipole axes are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotorAxis {
    /// Along the body z axis (motor shafts).
    #[default]
    Vertical,
    /// Uniform on the unit sphere, independently per component.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotorComponent {
    pub kind: MotorKind,
    /// Hz
    pub base_frequency: f64,
    pub chirp_factor: f64,
    /// A·m²
    pub moment_amplitude: f64,
    /// unit vector
    pub axis: Vec3,
    /// rad
    pub phase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Motor {
    /// Body-frame offset from the UAV reference point, m.
    pub offset: Vec3,
    pub components: [MotorComponent; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub mines: Vec<MineSource>,
    pub motors: Vec<Motor>,
    pub path: FlightPath,
    pub sensor1_offset: Vec3,
    pub sensor2_offset: Vec3,
    /// nT, per axis
    pub noise_sigma: f64,
    /// nT
    pub background_field: Vec3,
    pub seed: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.path.validate()?;
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(invalid("noise_sigma", "must be non-negative and finite"));
        }
        if !self.background_field.is_finite() {
            return Err(invalid("background_field", "must be finite"));
        }
        if !self.sensor1_offset.is_finite() || !self.sensor2_offset.is_finite() {
            return Err(invalid("sensor_offset", "must be finite"));
        }
        for mine in &self.mines {
            if !mine.position.is_finite() || !mine.moment.is_finite() || mine.moment.norm() == 0.0 {
                return Err(invalid("mines", "position and moment must be finite, moment nonzero"));
            }
        }
        for motor in &self.motors {
            for c in &motor.components {
                if !(c.base_frequency >= 0.0 && c.chirp_factor >= 1.0 && c.moment_amplitude >= 0.0) || !c.axis.is_finite() {
                    return Err(invalid("motors", "component parameters out of range"));
                }
            }
        }
        Ok(())
    }

    pub fn duration(&self) -> f64 {
        self.path.duration()
    }
}

/// Knobs shared by the scenario generators. Defaults reproduce the reference survey.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioParams {
    pub grid_size: f64,
    pub n_lines: usize,
    pub altitude: f64,
    pub speed: f64,
    pub sample_rate: f64,
    pub noise_sigma: f64,
    pub min_separation: f64,
    pub max_depth: f64,
    pub motor_square_side: f64,
    pub sensor_separation: f64,
    pub background_magnitude: f64,
    /// degrees below horizontal
    pub background_inclination_deg: f64,
    pub mine_moment: Vec3,
    pub moment_amplitude_range: [f64; 2],
    pub chirp_range: [f64; 2],
    pub motor_axis: MotorAxis,
    pub placement_attempts: usize,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            grid_size: 10.0,
            n_lines: 9,
            altitude: 0.5,
            speed: 1.0,
            sample_rate: 100.0,
            noise_sigma: 10.0,
            min_separation: 2.0,
            max_depth: 0.15,
            motor_square_side: 0.10,
            sensor_separation: 0.10,
            background_magnitude: 50_000.0,
            background_inclination_deg: 60.0,
            mine_moment: M19_MOMENT,
            moment_amplitude_range: [0.010, 0.040],
            chirp_range: [1.0, 5.0],
            motor_axis: MotorAxis::Vertical,
            placement_attempts: 100_000,
        }
    }
}

impl ScenarioParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("grid_size", self.grid_size),
            ("altitude", self.altitude),
            ("speed", self.speed),
            ("sample_rate", self.sample_rate),
            ("motor_square_side", self.motor_square_side),
            ("sensor_separation", self.sensor_separation),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, "must be positive and finite"));
            }
        }
        let non_negative = [
            ("noise_sigma", self.noise_sigma),
            ("min_separation", self.min_separation),
            ("max_depth", self.max_depth),
            ("background_magnitude", self.background_magnitude),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(name, "must be non-negative and finite"));
            }
        }
        if self.n_lines < 2 {
            return Err(invalid("n_lines", "need at least two passes"));
        }
        let [a_lo, a_hi] = self.moment_amplitude_range;
        if !(0.0 <= a_lo && a_lo <= a_hi) {
            return Err(invalid("moment_amplitude_range", "need 0 <= low <= high"));
        }
        let [c_lo, c_hi] = self.chirp_range;
        if !(1.0 <= c_lo && c_lo <= c_hi) {
            return Err(invalid("chirp_range", "need 1 <= low <= high"));
        }
        if !self.mine_moment.is_finite() || self.mine_moment.norm() == 0.0 {
            return Err(invalid("mine_moment", "must be finite and nonzero"));
        }
        Ok(())
    }

    /// Uniform background vector pointing north (+x) and dipping below the horizon.
    pub fn background_field(&self) -> Vec3 {
        let inc = self.background_inclination_deg.to_radians();
        Vec3::new(inc.cos(), 0.0, -inc.sin()) * self.background_magnitude
    }

    fn path(&self, altitude: f64) -> Result<FlightPath> {
        serpentine_path(self.grid_size, self.n_lines, altitude, self.speed, self.sample_rate)
    }

    /// Four motors on a square centred on sensor 1, in the plane of sensor 1.
    fn motor_offsets(&self) -> [Vec3; 4] {
        let h = self.motor_square_side / 2.0;
        [Vec3::new(h, h, 0.0), Vec3::new(-h, h, 0.0), Vec3::new(-h, -h, 0.0), Vec3::new(h, -h, 0.0)]
    }
}

fn scenario_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_unit_vector(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(StandardNormal.sample(rng), StandardNormal.sample(rng), StandardNormal.sample(rng));
        let n = v.norm();
        if n > 1e-12 {
            return v * (1.0 / n);
        }
    }
}

fn random_motors(params: &ScenarioParams, rng: &mut ChaCha8Rng) -> Vec<Motor> {
    let [a_lo, a_hi] = params.moment_amplitude_range;
    let [c_lo, c_hi] = params.chirp_range;
    params
        .motor_offsets()
        .into_iter()
        .map(|offset| {
            let components = MotorKind::ALL.map(|kind| MotorComponent {
                kind,
                base_frequency: kind.base_frequency(),
                chirp_factor: uniform(rng, c_lo, c_hi),
                moment_amplitude: uniform(rng, a_lo, a_hi),
                axis: match params.motor_axis {
                    MotorAxis::Vertical => Vec3::new(0.0, 0.0, 1.0),
                    MotorAxis::Random => random_unit_vector(rng),
                },
                phase: rng.gen_range(0.0..2.0 * PI),
            });
            Motor { offset, components }
        })
        .collect()
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

fn assemble(params: &ScenarioParams, mines: Vec<MineSource>, motors: Vec<Motor>, altitude: f64, seed: u64) -> Result<Scenario> {
    let sensor1_offset = Vec3::ZERO;
    let scenario = Scenario {
        mines,
        motors,
        path: params.path(altitude)?,
        sensor1_offset,
        sensor2_offset: sensor1_offset + Vec3::new(0.0, 0.0, -params.sensor_separation),
        noise_sigma: params.noise_sigma,
        background_field: params.background_field(),
        seed,
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Random mine placement with minimum horizontal separation, plus random motor draws.
pub fn generate_random_scenario(seed: u64, n_mines: usize, params: &ScenarioParams) -> Result<Scenario> {
    params.validate()?;
    if n_mines == 0 {
        return Err(invalid("n_mines", "need at least one mine"));
    }
    let mut rng = scenario_rng(seed);
    let mut mines: Vec<MineSource> = Vec::with_capacity(n_mines);
    let mut attempts = 0;
    while mines.len() < n_mines {
        if attempts >= params.placement_attempts {
            return Err(Error::PlacementFailed {
                n_mines,
                min_separation: params.min_separation,
                attempts,
            });
        }
        attempts += 1;
        let candidate = Vec3::new(
            rng.gen_range(0.0..=params.grid_size),
            rng.gen_range(0.0..=params.grid_size),
            -uniform(&mut rng, 0.0, params.max_depth),
        );
        if mines.iter().all(|m| m.position.distance_xy(candidate) >= params.min_separation) {
            mines.push(MineSource {
                position: candidate,
                moment: params.mine_moment,
            });
        }
    }
    let motors = random_motors(params, &mut rng);
    assemble(params, mines, motors, params.altitude, seed)
}

/// Four mines on the corners of a 6 m square centred on the grid, buried flush with
/// the ground plane. Motor draws depend only on `seed`, never on `altitude`.
pub fn fixed_corner_scenario(seed: u64, altitude: f64, params: &ScenarioParams) -> Result<Scenario> {
    params.validate()?;
    if !(0.5..=3.0).contains(&altitude) {
        return Err(invalid("altitude", format!("{altitude} outside [0.5, 3.0] m")));
    }
    let centre = params.grid_size / 2.0;
    let half = 3.0;
    let mines = [(-half, -half), (-half, half), (half, -half), (half, half)]
        .into_iter()
        .map(|(dx, dy)| MineSource {
            position: Vec3::new(centre + dx, centre + dy, 0.0),
            moment: params.mine_moment,
        })
        .collect();
    let mut rng = scenario_rng(seed);
    let motors = random_motors(params, &mut rng);
    assemble(params, mines, motors, altitude, seed)
}

impl Scenario {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let scenario: Scenario = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_scenario() {
        let p = ScenarioParams::default();
        let a = generate_random_scenario(7, 5, &p).unwrap();
        let b = generate_random_scenario(7, 5, &p).unwrap();
        assert_eq!(a, b);
        let c = generate_random_scenario(8, 5, &p).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn six_mines_keep_their_distance() {
        let p = ScenarioParams::default();
        for seed in 0..15 {
            let s = generate_random_scenario(seed, 6, &p).unwrap();
            let mut pairs = 0;
            for i in 0..6 {
                for j in i + 1..6 {
                    assert!(s.mines[i].position.distance_xy(s.mines[j].position) >= 2.0);
                    pairs += 1;
                }
            }
            assert_eq!(pairs, 15);
            for m in &s.mines {
                assert!((-0.15..=0.0).contains(&m.position.z));
                assert!((0.0..=10.0).contains(&m.position.x) && (0.0..=10.0).contains(&m.position.y));
                assert_eq!(m.moment, M19_MOMENT);
            }
        }
    }

    #[test]
    fn motor_draws_respect_ranges() {
        let s = generate_random_scenario(3, 4, &ScenarioParams::default()).unwrap();
        assert_eq!(s.motors.len(), 4);
        for motor in &s.motors {
            for (c, kind) in motor.components.iter().zip(MotorKind::ALL) {
                assert_eq!(c.kind, kind);
                assert_eq!(c.base_frequency, kind.base_frequency());
                assert!((1.0..=5.0).contains(&c.chirp_factor));
                assert!((0.010..=0.040).contains(&c.moment_amplitude));
                assert!((c.axis.norm() - 1.0).abs() < 1e-12);
            }
        }
        // square of side 10 cm
        let d = (s.motors[0].offset - s.motors[1].offset).norm();
        assert!((d - 0.1).abs() < 1e-12);
        assert_eq!(s.sensor2_offset - s.sensor1_offset, Vec3::new(0.0, 0.0, -0.1));
    }

    #[test]
    fn random_axes_are_unit_and_distinct() {
        let p = ScenarioParams {
            motor_axis: MotorAxis::Random,
            ..Default::default()
        };
        let s = generate_random_scenario(3, 4, &p).unwrap();
        let axes: Vec<Vec3> = s.motors.iter().flat_map(|m| m.components.iter().map(|c| c.axis)).collect();
        assert!(axes.iter().all(|a| (a.norm() - 1.0).abs() < 1e-12));
        assert!(axes.windows(2).all(|w| w[0] != w[1]));
        let v = generate_random_scenario(3, 4, &ScenarioParams::default()).unwrap();
        assert!(v.motors.iter().all(|m| m.components.iter().all(|c| c.axis == Vec3::new(0.0, 0.0, 1.0))));
    }

    #[test]
    fn impossible_packing_errors_out() {
        let p = ScenarioParams {
            grid_size: 1.0,
            placement_attempts: 500,
            ..Default::default()
        };
        assert!(matches!(generate_random_scenario(1, 3, &p), Err(Error::PlacementFailed { attempts: 500, .. })));
    }

    #[test]
    fn corner_mines_and_altitude_independence() {
        let p = ScenarioParams::default();
        let low = fixed_corner_scenario(11, 0.5, &p).unwrap();
        let high = fixed_corner_scenario(11, 2.3, &p).unwrap();
        let xy: Vec<(f64, f64)> = low.mines.iter().map(|m| (m.position.x, m.position.y)).collect();
        assert_eq!(xy, vec![(2.0, 2.0), (2.0, 8.0), (8.0, 2.0), (8.0, 8.0)]);
        assert_eq!(low.path.altitude, 0.5);
        assert_eq!(high.path.altitude, 2.3);
        assert_eq!(low.mines, high.mines);
        assert_eq!(low.motors, high.motors);
        assert!(fixed_corner_scenario(11, 0.2, &p).is_err());
    }

    #[test]
    fn background_default_is_fifty_thousand_nt() {
        let b = ScenarioParams::default().background_field();
        assert!((b.norm() - 50_000.0).abs() < 1e-9);
        assert!((b.z / b.norm() + 60f64.to_radians().sin()).abs() < 1e-12);
    }

    #[test]
    fn toml_round_trip_and_strictness() {
        let s = generate_random_scenario(5, 3, &ScenarioParams::default()).unwrap();
        let text = s.to_toml().unwrap();
        assert_eq!(Scenario::from_toml(&text).unwrap(), s);
        let bad = text.replacen("noise_sigma", "noise_sigmaa", 1);
        assert!(Scenario::from_toml(&bad).is_err());
    }
}
