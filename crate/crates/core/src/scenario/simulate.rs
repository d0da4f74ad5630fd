use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Result};
use crate::vec3::Vec3;

use super::field::{dipole_field, motor_field};
use super::{Scenario, SurveyRecord};

/// Noise draws use their own ChaCha stream so they never alias the scenario draws.
const NOISE_STREAM: u64 = 1;

/// Forward-model both magnetometers along the flight path.
pub fn simulate(scenario: &Scenario) -> Result<SurveyRecord> {
    scenario.validate()?;
    let path = &scenario.path;
    let n = path.n_samples();
    let duration = path.duration();
    let dt = 1.0 / path.sample_rate;

    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    rng.set_stream(NOISE_STREAM);
    let noise = Normal::new(0.0, scenario.noise_sigma).map_err(|e| invalid("noise_sigma", e.to_string()))?;
    let mut draw = || -> Vec3 {
        if scenario.noise_sigma == 0.0 {
            Vec3::ZERO
        } else {
            Vec3::new(noise.sample(&mut rng), noise.sample(&mut rng), noise.sample(&mut rng))
        }
    };

    let mut record = SurveyRecord::with_capacity(n);
    for i in 0..n {
        let t = i as f64 * dt;
        let uav = path.position_at(t);
        let p1 = uav + scenario.sensor1_offset;
        let p2 = uav + scenario.sensor2_offset;

        let mut mine1 = Vec3::ZERO;
        let mut mine2 = Vec3::ZERO;
        for mine in &scenario.mines {
            mine1 += dipole_field(mine.moment, mine.position, p1)?;
            mine2 += dipole_field(mine.moment, mine.position, p2)?;
        }
        let mut motor1 = Vec3::ZERO;
        let mut motor2 = Vec3::ZERO;
        for motor in &scenario.motors {
            motor1 += motor_field(motor, uav, scenario.sensor1_offset, t, duration)?;
            motor2 += motor_field(motor, uav, scenario.sensor2_offset, t, duration)?;
        }

        let truth = scenario.background_field + mine1;
        let b1 = truth + motor1 + draw();
        let b2 = scenario.background_field + mine2 + motor2 + draw();

        record.times.push(t);
        record.positions1.push(p1);
        record.positions2.push(p2);
        record.b1.push(b1);
        record.b2.push(b2);
        record.truth1.push(truth);
    }
    Ok(record)
}
