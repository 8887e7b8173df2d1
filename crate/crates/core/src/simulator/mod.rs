//! Synthetic datasets: environments, trajectories, raycast scans and noise.

pub mod environment;
pub mod lidar;
pub mod noise;
pub mod trajectory;

pub use environment::{build_environment, Aabb, Environment, MotionEnvelope, Primitive, ENVIRONMENT_NAMES};
pub use lidar::{raycast_scan, LidarModel};
pub use noise::{apply_noise, NoiseModel};
pub use trajectory::{check_trajectory, generate_trajectory, Sinusoid, TrajectorySpec};

use crate::error::Result;
use crate::geometry::{calib_to_transform, pose_to_transform, CalibParams, Pose, Scan};
use crate::par::map_indices;

/// Default ground-truth calibration used by the simulator.
pub fn default_truth() -> CalibParams {
    CalibParams::new(0.1, -0.05, 0.2, 5f64.to_radians(), 60f64.to_radians(), -10f64.to_radians(), 1.0)
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub environment: String,
    pub lidar: LidarModel,
    pub noise: NoiseModel,
    pub trajectory: TrajectorySpec,
    pub truth: CalibParams,
    /// Injected lidar clock offset (s): scan stamps are true time plus this.
    pub time_offset: f64,
    pub scans: Vec<Scan>,
    /// Base poses as reported (SLAM scale, noisy).
    pub poses: Vec<Pose>,
    /// Metric, noise-free base poses.
    pub true_poses: Vec<Pose>,
}

/// Simulates one run: trajectory, one sweep per pose at the true extrinsic,
/// reported poses divided by the true scale, noise, and finally the time
/// offset added to every scan stamp.
pub fn make_dataset(
    env: &Environment,
    trajectory: &TrajectorySpec,
    lidar: &LidarModel,
    noise: &NoiseModel,
    truth: &CalibParams,
    time_offset: f64,
) -> Result<Dataset> {
    lidar.validate()?;
    truth.validate()?;
    let true_poses = generate_trajectory(trajectory, lidar.rate_hz)?;
    check_trajectory(env, &true_poses)?;
    let t_cl = calib_to_transform(truth)?;
    let chains = true_poses.iter().map(|p| Ok(pose_to_transform(p, 1.0)? * t_cl)).collect::<Result<Vec<_>>>()?;
    let scans = map_indices(true_poses.len(), |k| raycast_scan(env, &chains[k], lidar, true_poses[k].t));

    let reported: Vec<Pose> = true_poses
        .iter()
        .map(|p| {
            let mut q = p.clone();
            q.x /= truth.scale;
            q.y /= truth.scale;
            q.z /= truth.scale;
            q
        })
        .collect();
    let (poses, mut scans) = apply_noise(&reported, &scans, noise)?;
    for s in &mut scans {
        s.t += time_offset;
    }
    Ok(Dataset {
        environment: env.name.clone(),
        lidar: *lidar,
        noise: *noise,
        trajectory: trajectory.clone(),
        truth: *truth,
        time_offset,
        scans,
        poses,
        true_poses,
    })
}
