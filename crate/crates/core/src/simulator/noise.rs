//! Gaussian noise on poses and ranges.

use nalgebra::Matrix6;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{wrap_angle, Pose, Scan};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Pose translation std-dev per axis (SLAM units).
    pub trans_std: f64,
    /// Pose rotation std-dev per Euler angle (rad).
    pub rot_std: f64,
    /// Lidar range std-dev (m).
    pub range_std: f64,
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self { trans_std: 0.05, rot_std: 1f64.to_radians(), range_std: 0.05, seed: 0 }
    }
}

impl NoiseModel {
    pub fn none() -> Self {
        Self { trans_std: 0.0, rot_std: 0.0, range_std: 0.0, seed: 0 }
    }

    pub fn is_none(&self) -> bool {
        self.trans_std == 0.0 && self.rot_std == 0.0 && self.range_std == 0.0
    }

    pub fn pose_covariance(&self) -> Matrix6<f64> {
        let (a, b) = (self.trans_std.powi(2), self.rot_std.powi(2));
        Matrix6::from_diagonal(&nalgebra::Vector6::new(a, a, a, b, b, b))
    }

    fn normal(std: f64) -> Result<Normal<f64>> {
        Normal::new(0.0, std).map_err(|e| Error::Config(format!("noise std-dev {std}: {e}")))
    }
}

/// Perturbs every pose component and every valid range, and sets each pose
/// covariance to the injected diagonal. Ranges are perturbed along the beam;
/// a return pushed to a non-positive range becomes invalid. Draws come from a
/// stream seeded by `noise.seed`, poses first then scans in order.
pub fn apply_noise(poses: &[Pose], scans: &[Scan], noise: &NoiseModel) -> Result<(Vec<Pose>, Vec<Scan>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let nt = NoiseModel::normal(noise.trans_std)?;
    let nr = NoiseModel::normal(noise.rot_std)?;
    let nrange = NoiseModel::normal(noise.range_std)?;
    let cov = noise.pose_covariance();

    let poses = poses
        .iter()
        .map(|p| {
            let mut q = p.clone();
            if noise.trans_std > 0.0 {
                q.x += nt.sample(&mut rng);
                q.y += nt.sample(&mut rng);
                q.z += nt.sample(&mut rng);
            }
            if noise.rot_std > 0.0 {
                q.roll = wrap_angle(q.roll + nr.sample(&mut rng));
                q.pitch = wrap_angle(q.pitch + nr.sample(&mut rng));
                q.yaw = wrap_angle(q.yaw + nr.sample(&mut rng));
            }
            q.cov = cov;
            q
        })
        .collect();

    let scans = scans
        .iter()
        .map(|s| {
            let mut s = s.clone();
            if noise.range_std > 0.0 {
                for r in s.returns.iter_mut().filter(|r| r.valid) {
                    let range = r.range();
                    let noisy = range + nrange.sample(&mut rng);
                    if noisy > 0.0 {
                        r.point *= noisy / range;
                    } else {
                        r.valid = false;
                    }
                }
            }
            s
        })
        .collect();
    Ok((poses, scans))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::LidarReturn;
    use nalgebra::Vector2;

    fn sample_data() -> (Vec<Pose>, Vec<Scan>) {
        let poses = (0..10).map(|k| Pose::new(k as f64, 0.1 * k as f64, 1.0, 2.0, 0.1, -0.2, 3.0)).collect();
        let scans = (0..10)
            .map(|k| Scan {
                t: k as f64,
                returns: (0..50)
                    .map(|b| LidarReturn { beam: b, point: Vector2::new(1.0 + b as f64, 0.5), valid: b % 7 != 0 })
                    .collect(),
            })
            .collect();
        (poses, scans)
    }

    #[test]
    fn zero_noise_is_identity() {
        let (p, s) = sample_data();
        let (p2, s2) = apply_noise(&p, &s, &NoiseModel::none()).unwrap();
        assert_eq!(p, p2);
        assert_eq!(s, s2);
    }

    #[test]
    fn covariance_matches_injected_noise() {
        let (p, s) = sample_data();
        let noise = NoiseModel::default();
        let (p2, _) = apply_noise(&p, &s, &noise).unwrap();
        let d = p2[0].cov.diagonal();
        assert_eq!(d[0], 0.05f64.powi(2));
        assert_eq!(d[5], 1f64.to_radians().powi(2));
        assert!(p2.iter().all(|q| q.validate().is_ok()));
    }

    #[test]
    fn range_noise_is_unbiased() {
        let n = 100_000;
        let scan = Scan {
            t: 0.0,
            returns: (0..n).map(|b| LidarReturn { beam: b as u32, point: Vector2::new(5.0, 0.0), valid: true }).collect(),
        };
        let noise = NoiseModel { range_std: 0.05, ..NoiseModel::none() };
        let (_, out) = apply_noise(&[], &[scan], &noise).unwrap();
        let mean = out[0].returns.iter().map(|r| r.range() - 5.0).sum::<f64>() / n as f64;
        assert!(mean.abs() < 3.0 * 0.05 / (n as f64).sqrt(), "mean {mean}");
        // direction preserved
        assert!(out[0].returns.iter().all(|r| r.point.y == 0.0));
    }

    #[test]
    fn invalid_returns_untouched_and_seeded() {
        let (p, s) = sample_data();
        let noise = NoiseModel { seed: 9, ..Default::default() };
        let (a, sa) = apply_noise(&p, &s, &noise).unwrap();
        let (b, sb) = apply_noise(&p, &s, &noise).unwrap();
        assert_eq!(a, b);
        assert_eq!(sa, sb);
        for (x, y) in s[0].returns.iter().zip(&sa[0].returns) {
            if !x.valid {
                assert_eq!(x, y);
            }
        }
    }
}
