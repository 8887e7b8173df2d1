//! Pose interpolation and temporal pre-calibration.

use nalgebra::{Rotation3, UnitQuaternion};
use serde::{Deserialize, Serialize};

use crate::entropy::{CloudBuilder, CloudConfig};
use crate::error::{Error, Result};
use crate::geometry::{condition_covariance_6, rotation_to_euler, CalibParams, Pose, Scan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RotationInterp {
    /// Shortest-arc interpolation between the bracketing orientations.
    #[default]
    Geodesic,
    /// Independent linear interpolation of each Euler angle.
    EulerLinear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeAlignConfig {
    /// Candidate offsets span `[min_offset, max_offset]` seconds.
    pub min_offset: f64,
    pub max_offset: f64,
    pub resolution: f64,
    /// Golden-section iterations around the best grid cell.
    pub refine_iters: usize,
    pub rotation_interp: RotationInterp,
}

impl Default for TimeAlignConfig {
    fn default() -> Self {
        TimeAlignConfig {
            min_offset: -0.05,
            max_offset: 0.05,
            resolution: 0.001,
            refine_iters: 20,
            rotation_interp: RotationInterp::Geodesic,
        }
    }
}

impl TimeAlignConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.min_offset <= 0.0 && self.max_offset >= 0.0 && self.min_offset < self.max_offset) {
            return Err(Error::Config(format!(
                "time offset range [{}, {}] must contain 0",
                self.min_offset, self.max_offset
            )));
        }
        if !(self.resolution > 0.0) {
            return Err(Error::Config("time resolution must be positive".into()));
        }
        Ok(())
    }

    fn grid(&self) -> Vec<f64> {
        let n = ((self.max_offset - self.min_offset) / self.resolution + 1e-9).floor() as usize;
        let mut g: Vec<f64> = (0..=n).map(|k| self.min_offset + k as f64 * self.resolution).collect();
        if (g[n] - self.max_offset).abs() > 1e-12 {
            g.push(self.max_offset);
        }
        g
    }
}

/// Pose at time `t`, interpolated between the two bracketing trajectory samples.
pub fn interpolate_pose(poses: &[Pose], t: f64, mode: RotationInterp) -> Result<Pose> {
    let (first, last) = match (poses.first(), poses.last()) {
        (Some(a), Some(b)) => (a.t, b.t),
        _ => return Err(Error::InvalidInput("empty trajectory".into())),
    };
    if !(t >= first && t <= last) {
        return Err(Error::Extrapolation { t, first, last });
    }
    let k = poses.partition_point(|p| p.t <= t);
    // poses[k - 1].t <= t, and k - 1 is valid since t >= first
    let a = &poses[k - 1];
    if a.t == t || k == poses.len() {
        let mut p = a.clone();
        p.t = t;
        return Ok(p);
    }
    let b = &poses[k];
    let u = (t - a.t) / (b.t - a.t);
    let lerp = |x: f64, y: f64| x + u * (y - x);
    let (roll, pitch, yaw) = match mode {
        RotationInterp::Geodesic => {
            let qa = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(a.rotation()));
            let mut qb = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(b.rotation()));
            if qa.coords.dot(&qb.coords) < 0.0 {
                qb = UnitQuaternion::new_unchecked(-qb.into_inner());
            }
            let q = qa.try_slerp(&qb, u, 1e-12).unwrap_or(qa);
            rotation_to_euler(q.to_rotation_matrix().matrix())
        }
        RotationInterp::EulerLinear => (lerp(a.roll, b.roll), lerp(a.pitch, b.pitch), lerp(a.yaw, b.yaw)),
    };
    let cov = condition_covariance_6(&(a.cov + (b.cov - a.cov) * u));
    Ok(Pose { t, x: lerp(a.x, b.x), y: lerp(a.y, b.y), z: lerp(a.z, b.z), roll, pitch, yaw, cov })
}

/// Pairs every scan with a pose at its corrected time `t - offset`.
///
/// Scans whose corrected time falls outside the trajectory are dropped. A pose
/// with exactly the corrected timestamp is used as is; otherwise one is
/// interpolated.
pub fn align_streams(scans: &[Scan], poses: &[Pose], offset: f64, mode: RotationInterp) -> Result<(Vec<Scan>, Vec<Pose>)> {
    align_subset(scans, poses, offset, mode, |_| true)
}

fn align_subset(
    scans: &[Scan],
    poses: &[Pose],
    offset: f64,
    mode: RotationInterp,
    keep: impl Fn(&Scan) -> bool,
) -> Result<(Vec<Scan>, Vec<Pose>)> {
    let mut out_scans = Vec::with_capacity(scans.len());
    let mut out_poses = Vec::with_capacity(scans.len());
    for scan in scans.iter().filter(|s| keep(s)) {
        let t = scan.t - offset;
        match interpolate_pose(poses, t, mode) {
            Ok(pose) => {
                let mut s = scan.clone();
                s.t = t;
                out_scans.push(s);
                out_poses.push(pose);
            }
            Err(Error::Extrapolation { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok((out_scans, out_poses))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeAlignResult {
    /// Estimated offset: lidar timestamps minus true acquisition time (s).
    pub offset: f64,
    pub cost: f64,
    /// Every evaluated `(offset, cost)`, grid first, then refinement.
    pub curve: Vec<(f64, f64)>,
    pub scans_used: usize,
}

/// Estimates the lidar time offset with the calibration held at `fixed`.
///
/// Only scans that stay inside the trajectory for every candidate offset are
/// used, so all candidates are scored on the same point set. The entropy is
/// scanned on a uniform grid, then refined by golden-section search within one
/// grid cell of the best sample.
pub fn time_align(
    scans: &[Scan],
    poses: &[Pose],
    fixed: &CalibParams,
    cfg: &TimeAlignConfig,
    cloud_cfg: &CloudConfig,
) -> Result<TimeAlignResult> {
    cfg.validate()?;
    fixed.validate()?;
    let (first, last) = match (poses.first(), poses.last()) {
        (Some(a), Some(b)) => (a.t, b.t),
        _ => return Err(Error::InvalidInput("empty trajectory".into())),
    };
    let usable = |s: &Scan| s.t - cfg.max_offset >= first && s.t - cfg.min_offset <= last;
    let scans_used = scans.iter().filter(|s| usable(s)).count();
    if scans_used == 0 {
        return Err(Error::InvalidInput("no scan lies inside the trajectory for every candidate offset".into()));
    }
    let cost_at = |offset: f64| -> f64 {
        let run = || -> Result<f64> {
            let (s, p) = align_subset(scans, poses, offset, cfg.rotation_interp, usable)?;
            CloudBuilder::new(&s, &p, cloud_cfg, fixed)?.cost(fixed, cloud_cfg)
        };
        run().unwrap_or(f64::INFINITY)
    };

    let mut curve: Vec<(f64, f64)> = cfg.grid().into_iter().map(|o| (o, cost_at(o))).collect();
    let best_k = (0..curve.len()).min_by(|&a, &b| curve[a].1.total_cmp(&curve[b].1)).unwrap_or(0);
    if !curve[best_k].1.is_finite() {
        return Err(Error::OptimizationFailed("entropy undefined for every candidate time offset".into()));
    }

    let mut lo = curve[best_k.saturating_sub(1)].0;
    let mut hi = curve[(best_k + 1).min(curve.len() - 1)].0;
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - ratio * (hi - lo);
    let mut d = lo + ratio * (hi - lo);
    let mut fc = cost_at(c);
    let mut fd = cost_at(d);
    curve.push((c, fc));
    curve.push((d, fd));
    for _ in 0..cfg.refine_iters {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - ratio * (hi - lo);
            fc = cost_at(c);
            curve.push((c, fc));
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + ratio * (hi - lo);
            fd = cost_at(d);
            curve.push((d, fd));
        }
    }
    let &(offset, cost) = curve.iter().min_by(|a, b| a.1.total_cmp(&b.1)).expect("non-empty curve");
    Ok(TimeAlignResult { offset, cost, curve, scans_used })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;
    use crate::geometry::euler_to_rotation;

fn pose_quaternion(p: &Pose) -> UnitQuaternion<f64> {
    UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(euler_to_rotation(p.roll, p.pitch, p.yaw)))
}

    fn traj() -> Vec<Pose> {
        vec![Pose::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0), Pose::new(1.0, 2.0, -4.0, 6.0, 0.0, 0.0, PI / 2.0)]
    }

    #[test]
    fn exact_timestamp_returns_sample() {
        let p = interpolate_pose(&traj(), 1.0, RotationInterp::Geodesic).unwrap();
        assert_eq!(p, traj()[1]);
        let p = interpolate_pose(&traj(), 0.0, RotationInterp::Geodesic).unwrap();
        assert_eq!(p, traj()[0]);
    }

    #[test]
    fn midpoint() {
        let p = interpolate_pose(&traj(), 0.5, RotationInterp::Geodesic).unwrap();
        assert_eq!((p.x, p.y, p.z), (1.0, -2.0, 3.0));
        assert!((p.yaw - PI / 4.0).abs() < 1e-12);
        assert!(p.roll.abs() < 1e-12 && p.pitch.abs() < 1e-12);
        let q = interpolate_pose(&traj(), 0.5, RotationInterp::EulerLinear).unwrap();
        assert!((q.yaw - PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn geodesic_takes_short_way_across_pi() {
        let a = Pose::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 170f64.to_radians());
        let b = Pose::new(1.0, 0.0, 0.0, 0.0, 0.0, 0.0, -170f64.to_radians());
        let p = interpolate_pose(&[a, b], 0.5, RotationInterp::Geodesic).unwrap();
        assert!((p.yaw.abs() - PI).abs() < 1e-9, "{}", p.yaw);
        assert!(pose_quaternion(&p).angle_to(&pose_quaternion(&Pose::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, PI))) < 1e-9);
    }

    #[test]
    fn outside_range_is_an_error() {
        assert!(matches!(interpolate_pose(&traj(), 1.5, RotationInterp::Geodesic), Err(Error::Extrapolation { .. })));
        assert!(matches!(interpolate_pose(&traj(), -0.1, RotationInterp::Geodesic), Err(Error::Extrapolation { .. })));
    }

    #[test]
    fn alignment_drops_scans_outside() {
        let scans = vec![Scan::new(0.0), Scan::new(0.5), Scan::new(1.0)];
        let (s, p) = align_streams(&scans, &traj(), 0.25, RotationInterp::Geodesic).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[0].t, 0.25);
        assert_eq!(p[1].t, 0.75);
        assert!(s.iter().zip(&p).all(|(a, b)| a.t == b.t));
    }

    #[test]
    fn grid_covers_range() {
        let g = TimeAlignConfig::default().grid();
        assert_eq!(g.len(), 101);
        assert!((g[50]).abs() < 1e-15);
        assert!(TimeAlignConfig { min_offset: 0.01, ..Default::default() }.validate().is_err());
    }
}
