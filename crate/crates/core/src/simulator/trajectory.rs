//! Sinusoidal base-sensor trajectories.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::environment::Environment;
use crate::error::{Error, Result};
use crate::geometry::Pose;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sinusoid {
    pub amplitude: f64,
    /// Hz
    pub frequency: f64,
    pub phase: f64,
}

impl Sinusoid {
    pub fn at(&self, t: f64) -> f64 {
        self.amplitude * (2.0 * PI * self.frequency * t + self.phase).sin()
    }
}

/// One sinusoid per pose component (x, y, z, roll, pitch, yaw) around `base`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySpec {
    pub duration: f64,
    pub base: [f64; 6],
    pub components: [Sinusoid; 6],
}

impl TrajectorySpec {
    /// The environment's default motion, zero phase.
    pub fn nominal(env: &Environment, duration: f64) -> Self {
        let m = &env.motion;
        let components =
            std::array::from_fn(|i| Sinusoid { amplitude: m.amplitude[i], frequency: m.frequency[i], phase: 0.0 });
        Self { duration, base: m.base, components }
    }

    /// Amplitudes scaled by U(0.5, 1.5), frequencies U(0.05, 0.4) Hz, phases U(0, 2 pi).
    pub fn randomized(env: &Environment, duration: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = &env.motion;
        let components = std::array::from_fn(|i| Sinusoid {
            amplitude: m.amplitude[i] * rng.random_range(0.5..1.5),
            frequency: rng.random_range(0.05..0.4),
            phase: rng.random_range(0.0..2.0 * PI),
        });
        Self { duration, base: m.base, components }
    }

    pub fn pose_at(&self, t: f64) -> Pose {
        let v: [f64; 6] = std::array::from_fn(|i| self.base[i] + self.components[i].at(t));
        Pose::new(t, v[0], v[1], v[2], v[3], v[4], v[5])
    }
}

/// Poses at `k / rate` for `k = 0 .. duration * rate`, with zero covariance.
pub fn generate_trajectory(spec: &TrajectorySpec, rate: f64) -> Result<Vec<Pose>> {
    if !(spec.duration > 0.0 && rate > 0.0) {
        return Err(Error::InvalidInput(format!("duration {} and rate {rate} must be positive", spec.duration)));
    }
    let n = (spec.duration * rate).round() as usize;
    Ok((0..n).map(|k| spec.pose_at(k as f64 / rate)).collect())
}

/// Fails at the first pose outside the environment's free space.
pub fn check_trajectory(env: &Environment, poses: &[Pose]) -> Result<()> {
    match poses.iter().find(|p| !env.is_free(&p.translation())) {
        Some(p) => Err(Error::InvalidInput(format!(
            "trajectory leaves the free space of {} at t={:.3} s ({:.3}, {:.3}, {:.3})",
            env.name, p.t, p.x, p.y, p.z
        ))),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::environment::build_environment;

    #[test]
    fn pose_count_and_timing() {
        let env = build_environment("simple_room").unwrap();
        let poses = generate_trajectory(&TrajectorySpec::nominal(&env, 50.0), 40.0).unwrap();
        assert_eq!(poses.len(), 2000);
        assert_eq!(poses[1].t, 0.025);
        assert!(poses.iter().all(|p| p.cov.iter().all(|&c| c == 0.0)));
    }

    #[test]
    fn randomized_ranges() {
        let env = build_environment("simple_room").unwrap();
        for seed in 0..20 {
            let s = TrajectorySpec::randomized(&env, 10.0, seed);
            for (c, a) in s.components.iter().zip(env.motion.amplitude) {
                assert!(c.amplitude >= 0.5 * a && c.amplitude <= 1.5 * a);
                assert!((0.05..0.4).contains(&c.frequency));
                assert!((0.0..2.0 * PI).contains(&c.phase));
            }
        }
        assert_eq!(TrajectorySpec::randomized(&env, 10.0, 3), TrajectorySpec::randomized(&env, 10.0, 3));
    }

    #[test]
    fn default_trajectories_are_collision_free() {
        for name in crate::simulator::ENVIRONMENT_NAMES {
            let env = build_environment(name).unwrap();
            for seed in 0..5 {
                let poses = generate_trajectory(&TrajectorySpec::randomized(&env, 50.0, seed), 40.0).unwrap();
                check_trajectory(&env, &poses).unwrap();
            }
        }
    }

    #[test]
    fn oversized_amplitude_rejected() {
        let env = build_environment("simple_room").unwrap();
        let mut spec = TrajectorySpec::nominal(&env, 10.0);
        spec.components[0].amplitude = 5.5;
        let poses = generate_trajectory(&spec, 40.0).unwrap();
        assert!(check_trajectory(&env, &poses).is_err());
    }
}
