//! Planar scanning lidar model and raycasting.

use nalgebra::{Vector2, Vector3};
use serde::{Deserialize, Serialize};

use super::environment::Environment;
use crate::error::{Error, Result};
use crate::geometry::{LidarReturn, Scan, Transform};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LidarModel {
    pub rate_hz: f64,
    /// Field of view (rad), centred on the lidar x axis.
    pub fov: f64,
    /// Angle between adjacent beams (rad).
    pub resolution: f64,
    pub range_min: f64,
    pub range_max: f64,
    /// Nominal range noise of the device (m). Noise is injected by [`super::apply_noise`].
    pub range_noise: f64,
}

impl Default for LidarModel {
    fn default() -> Self {
        Self {
            rate_hz: 40.0,
            fov: 240f64.to_radians(),
            resolution: 0.25f64.to_radians(),
            range_min: 0.1,
            range_max: 30.0,
            range_noise: 0.05,
        }
    }
}

impl LidarModel {
    pub fn beam_count(&self) -> usize {
        (self.fov / self.resolution).round() as usize + 1
    }

    pub fn beam_angle(&self, beam: usize) -> f64 {
        -0.5 * self.fov + beam as f64 * self.resolution
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.rate_hz > 0.0
            && self.fov > 0.0
            && self.resolution > 0.0
            && self.range_min >= 0.0
            && self.range_max > self.range_min
            && self.range_noise >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid lidar model {self:?}")))
        }
    }
}

/// One sweep from a lidar at `lidar_to_world`. Beams without a hit inside the
/// range window are returned invalid with a zero point.
pub fn raycast_scan(env: &Environment, lidar_to_world: &Transform, model: &LidarModel, t: f64) -> Scan {
    let origin = lidar_to_world.translation();
    let rot = lidar_to_world.rotation();
    let returns = (0..model.beam_count())
        .map(|k| {
            let a = model.beam_angle(k);
            let local = Vector2::new(a.cos(), a.sin());
            let dir = rot * Vector3::new(local.x, local.y, 0.0);
            match env.raycast(&origin, &dir) {
                Some(r) if r >= model.range_min && r <= model.range_max => {
                    LidarReturn { beam: k as u32, point: local * r, valid: true }
                }
                _ => LidarReturn { beam: k as u32, point: Vector2::zeros(), valid: false },
            }
        })
        .collect();
    Scan { t, returns }
}
