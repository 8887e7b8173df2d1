//! Poses, similarity transforms and the inverse sensor model.
//!
//! Euler angles follow the Z-Y-X intrinsic convention throughout:
//! `R = Rz(yaw) * Ry(pitch) * Rx(roll)`. Imported pose files must use the
//! same convention.
//!
//! The trajectory scale `s` multiplies the base-sensor translation only. The
//! lidar-to-base transform is metric and scale-free.

use std::f64::consts::PI;
use std::ops::Mul;

use nalgebra::{Matrix3, Matrix3x6, Matrix4, Matrix6, SymmetricEigen, Vector2, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on asymmetry / negative eigenvalues accepted in a pose covariance.
pub const COV_TOL: f64 = 1e-12;
/// Distance from +/- pi/2 pitch at which Euler extraction treats the rotation as gimbal locked.
pub const GIMBAL_EPS: f64 = 1e-6;

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// `Rz(yaw) * Ry(pitch) * Rx(roll)`.
pub fn euler_to_rotation(roll: f64, pitch: f64, yaw: f64) -> Matrix3<f64> {
    let (sr, cr) = roll.sin_cos();
    let (sp, cp) = pitch.sin_cos();
    let (sy, cy) = yaw.sin_cos();
    Matrix3::new(
        cy * cp,
        cy * sp * sr - sy * cr,
        cy * sp * cr + sy * sr,
        sy * cp,
        sy * sp * sr + cy * cr,
        sy * sp * cr - cy * sr,
        -sp,
        cp * sr,
        cp * cr,
    )
}

/// Inverse of [`euler_to_rotation`]. Returns `(roll, pitch, yaw)`.
///
/// At gimbal lock the roll is set to zero and the whole in-plane rotation is
/// attributed to yaw.
pub fn rotation_to_euler(r: &Matrix3<f64>) -> (f64, f64, f64) {
    let pitch = (-r[(2, 0)]).clamp(-1.0, 1.0).asin();
    if (pitch.abs() - PI / 2.0).abs() < GIMBAL_EPS {
        let yaw = (-r[(0, 1)]).atan2(r[(1, 1)]);
        (0.0, pitch, wrap_angle(yaw))
    } else {
        let roll = r[(2, 1)].atan2(r[(2, 2)]);
        let yaw = r[(1, 0)].atan2(r[(0, 0)]);
        (wrap_angle(roll), pitch, wrap_angle(yaw))
    }
}

fn all_finite(vals: &[f64]) -> bool {
    vals.iter().all(|v| v.is_finite())
}

/// The seven calibration unknowns: lidar-to-base translation (m), lidar-to-base
/// rotation (rad, Z-Y-X Euler) and the trajectory scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibParams {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
    pub scale: f64,
}

impl Default for CalibParams {
    fn default() -> Self {
        Self::identity()
    }
}

impl CalibParams {
    pub const NAMES: [&'static str; 7] = ["x", "y", "z", "phi", "theta", "psi", "s"];

    pub fn identity() -> Self {
        Self { x: 0.0, y: 0.0, z: 0.0, roll: 0.0, pitch: 0.0, yaw: 0.0, scale: 1.0 }
    }

    pub fn new(x: f64, y: f64, z: f64, roll: f64, pitch: f64, yaw: f64, scale: f64) -> Self {
        Self { x, y, z, roll, pitch, yaw, scale }
    }

    pub fn to_array(&self) -> [f64; 7] {
        [self.x, self.y, self.z, self.roll, self.pitch, self.yaw, self.scale]
    }

    pub fn from_array(a: [f64; 7]) -> Self {
        Self::new(a[0], a[1], a[2], a[3], a[4], a[5], a[6])
    }

    /// Optimizer coordinates: the scale is searched as `ln s` so it stays positive.
    pub fn to_search_vector(&self) -> [f64; 7] {
        let mut a = self.to_array();
        a[6] = self.scale.ln();
        a
    }

    pub fn from_search_vector(v: &[f64]) -> Self {
        Self::new(v[0], v[1], v[2], v[3], v[4], v[5], v[6].exp())
    }

    /// Same rotation with angles wrapped into `(-pi, pi]`.
    pub fn normalized(&self) -> Self {
        Self {
            roll: wrap_angle(self.roll),
            pitch: wrap_angle(self.pitch),
            yaw: wrap_angle(self.yaw),
            ..*self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !all_finite(&self.to_array()) {
            return Err(Error::InvalidInput(format!("non-finite calibration parameters {self:?}")));
        }
        if self.scale <= 0.0 {
            return Err(Error::InvalidInput(format!("scale must be positive, got {}", self.scale)));
        }
        Ok(())
    }

    pub fn get(&self, i: usize) -> f64 {
        self.to_array()[i]
    }

    pub fn with(&self, i: usize, value: f64) -> Self {
        let mut a = self.to_array();
        a[i] = value;
        Self::from_array(a)
    }
}

/// Timestamped 6-DOF base-sensor pose with its 6x6 covariance (global frame,
/// ordered x, y, z, roll, pitch, yaw).
#[derive(Debug, Clone, PartialEq)]
pub struct Pose {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
    pub cov: Matrix6<f64>,
}

impl Pose {
    pub fn new(t: f64, x: f64, y: f64, z: f64, roll: f64, pitch: f64, yaw: f64) -> Self {
        Self { t, x, y, z, roll, pitch, yaw, cov: Matrix6::zeros() }
    }

    pub fn from_vector(t: f64, v: &[f64; 6], cov: Matrix6<f64>) -> Self {
        Self { t, x: v[0], y: v[1], z: v[2], roll: v[3], pitch: v[4], yaw: v[5], cov }
    }

    pub fn vector(&self) -> [f64; 6] {
        [self.x, self.y, self.z, self.roll, self.pitch, self.yaw]
    }

    pub fn translation(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn rotation(&self) -> Matrix3<f64> {
        euler_to_rotation(self.roll, self.pitch, self.yaw)
    }

    /// Checks finiteness and that the covariance is symmetric PSD within [`COV_TOL`].
    pub fn validate(&self) -> Result<()> {
        if !self.t.is_finite() || !all_finite(&self.vector()) || !all_finite(self.cov.as_slice()) {
            return Err(Error::InvalidInput(format!("non-finite pose at t={}", self.t)));
        }
        let asym = (self.cov - self.cov.transpose()).abs().max();
        if asym > COV_TOL {
            return Err(Error::InvalidInput(format!(
                "pose covariance at t={} is not symmetric (max asymmetry {asym:e})",
                self.t
            )));
        }
        if self.cov.iter().any(|&v| v != 0.0) {
            let min_eig = SymmetricEigen::new(self.cov).eigenvalues.min();
            if min_eig < -COV_TOL {
                return Err(Error::InvalidInput(format!(
                    "pose covariance at t={} is not PSD (eigenvalue {min_eig:e})",
                    self.t
                )));
            }
        }
        Ok(())
    }
}

/// A single lidar return in the scan plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LidarReturn {
    pub beam: u32,
    pub point: Vector2<f64>,
    pub valid: bool,
}

impl LidarReturn {
    pub fn range(&self) -> f64 {
        self.point.norm()
    }
}

/// All returns of one sweep, in beam order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scan {
    pub t: f64,
    pub returns: Vec<LidarReturn>,
}

impl Scan {
    pub fn new(t: f64) -> Self {
        Self { t, returns: Vec::new() }
    }

    pub fn valid_count(&self) -> usize {
        self.returns.iter().filter(|r| r.valid).count()
    }
}

/// 4x4 homogeneous rigid transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transform(pub Matrix4<f64>);

impl Transform {
    pub fn identity() -> Self {
        Transform(Matrix4::identity())
    }

    pub fn from_parts(rotation: &Matrix3<f64>, translation: &Vector3<f64>) -> Self {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(translation);
        Transform(m)
    }

    pub fn rotation(&self) -> Matrix3<f64> {
        self.0.fixed_view::<3, 3>(0, 0).into_owned()
    }

    pub fn translation(&self) -> Vector3<f64> {
        self.0.fixed_view::<3, 1>(0, 3).into_owned()
    }

    pub fn apply(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation() * p + self.translation()
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation().transpose();
        Transform::from_parts(&rt, &(-(rt * self.translation())))
    }

    /// Checks orthonormality, unit determinant and the homogeneous bottom row.
    pub fn is_valid(&self, tol: f64) -> bool {
        let r = self.rotation();
        let ortho = (r.transpose() * r - Matrix3::identity()).abs().max() <= tol;
        let det = (r.determinant() - 1.0).abs() <= tol;
        let row = self.0.row(3);
        ortho && det && row[0] == 0.0 && row[1] == 0.0 && row[2] == 0.0 && row[3] == 1.0
    }
}

impl Mul for Transform {
    type Output = Transform;
    fn mul(self, rhs: Transform) -> Transform {
        Transform(self.0 * rhs.0)
    }
}

/// A lifted lidar point: one component of the Gaussian mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorldPoint {
    pub position: Vector3<f64>,
    pub cov: Matrix3<f64>,
    pub t: f64,
    /// (scan index, return index within the scan)
    pub source: (usize, usize),
}

fn pose_transform_unchecked(v: &[f64; 6], scale: f64) -> Matrix4<f64> {
    let r = euler_to_rotation(v[3], v[4], v[5]);
    let t = Vector3::new(v[0], v[1], v[2]) * scale;
    Transform::from_parts(&r, &t).0
}

/// `T_{G,C}` for a base pose, with the translation multiplied by `scale`.
pub fn pose_to_transform(pose: &Pose, scale: f64) -> Result<Transform> {
    if !all_finite(&pose.vector()) || !scale.is_finite() {
        return Err(Error::InvalidInput("non-finite pose or scale".into()));
    }
    if scale <= 0.0 {
        return Err(Error::InvalidInput(format!("scale must be positive, got {scale}")));
    }
    Ok(Transform(pose_transform_unchecked(&pose.vector(), scale)))
}

/// `T_{C,L}` from the calibration parameters. The scale is not part of this transform.
pub fn calib_to_transform(params: &CalibParams) -> Result<Transform> {
    if !all_finite(&params.to_array()) {
        return Err(Error::InvalidInput("non-finite calibration parameters".into()));
    }
    let r = euler_to_rotation(params.roll, params.pitch, params.yaw);
    Ok(Transform::from_parts(&r, &Vector3::new(params.x, params.y, params.z)))
}

/// Recovers calibration parameters from `T_{C,L}`; the scale is supplied separately.
pub fn transform_to_calib(t: &Transform, scale: f64) -> CalibParams {
    let (roll, pitch, yaw) = rotation_to_euler(&t.rotation());
    let p = t.translation();
    CalibParams::new(p.x, p.y, p.z, roll, pitch, yaw, scale)
}

fn homogeneous(p: &Vector2<f64>) -> Vector4<f64> {
    Vector4::new(p.x, p.y, 0.0, 1.0)
}

/// Everything needed to lift the points of one scan: the nominal chain
/// `T_{G,C}(s) T_{C,L}` plus the chains for each +/- pose-parameter perturbation
/// used by the finite-difference Jacobian.
#[derive(Debug, Clone)]
pub struct ScanLifter {
    chain: Matrix4<f64>,
    perturbed: Option<Box<[(Matrix4<f64>, Matrix4<f64>, f64); 3]>>,
    scale: f64,
    cov: Matrix6<f64>,
}

impl ScanLifter {
    /// Builds the lifter. Perturbed chains are only prepared when the pose
    /// covariance is non-zero, since a zero `Q` gives a zero point covariance.
    pub fn new(pose: &Pose, calib: &Transform, scale: f64) -> Self {
        let y = pose.vector();
        let chain = pose_transform_unchecked(&y, scale) * calib.0;
        let has_cov = pose.cov.iter().any(|&v| v != 0.0);
        let perturbed = has_cov.then(|| {
            Box::new(std::array::from_fn(|k| {
                let i = k + 3;
                let h = fd_step(y[i]);
                let mut plus = y;
                plus[i] += h;
                let mut minus = y;
                minus[i] -= h;
                (
                    pose_transform_unchecked(&plus, scale) * calib.0,
                    pose_transform_unchecked(&minus, scale) * calib.0,
                    // actual step after rounding
                    plus[i] - minus[i],
                )
            }))
        });
        Self { chain, perturbed, scale, cov: pose.cov }
    }

    pub fn position(&self, p: &Vector2<f64>) -> Vector3<f64> {
        (self.chain * homogeneous(p)).xyz()
    }

    /// Jacobian of the lifted point w.r.t. the six pose parameters.
    ///
    /// The translation enters the model as `s * t`, so its block is exactly
    /// `s * I`; the rotation columns use central differences.
    pub fn jacobian(&self, p: &Vector2<f64>) -> Matrix3x6<f64> {
        let mut j = Matrix3x6::zeros();
        if let Some(perturbed) = &self.perturbed {
            for i in 0..3 {
                j[(i, i)] = self.scale;
            }
            let ph = homogeneous(p);
            for (k, (plus, minus, span)) in perturbed.iter().enumerate() {
                let d = ((plus * ph) - (minus * ph)).xyz() / *span;
                j.set_column(k + 3, &d);
            }
        }
        j
    }

    /// Unclamped `J Q J^T` (not symmetrized).
    pub fn raw_covariance(&self, p: &Vector2<f64>) -> Matrix3<f64> {
        if self.perturbed.is_none() {
            return Matrix3::zeros();
        }
        let j = self.jacobian(p);
        j * self.cov * j.transpose()
    }

    /// Symmetrized, PSD-clamped point covariance.
    pub fn covariance(&self, p: &Vector2<f64>) -> Matrix3<f64> {
        if self.perturbed.is_none() {
            return Matrix3::zeros();
        }
        condition_covariance(&self.raw_covariance(p))
    }
}

/// Finite-difference step for one pose parameter.
pub fn fd_step(value: f64) -> f64 {
    (1e-6 * value.abs()).max(1e-6)
}

/// Symmetrizes a 3x3 covariance and clamps negative eigenvalues to zero.
pub fn condition_covariance(m: &Matrix3<f64>) -> Matrix3<f64> {
    let s = (m + m.transpose()) * 0.5;
    if sym3_eigenvalues(&s)[0] >= 0.0 {
        return s;
    }
    let mut eig = SymmetricEigen::new(s);
    eig.eigenvalues.iter_mut().for_each(|l| *l = l.max(0.0));
    let out = eig.recompose();
    (out + out.transpose()) * 0.5
}

/// Symmetrizes a 6x6 pose covariance and clamps negative eigenvalues to zero.
pub fn condition_covariance_6(m: &Matrix6<f64>) -> Matrix6<f64> {
    let s = (m + m.transpose()) * 0.5;
    if s.iter().all(|&v| v == 0.0) || s.cholesky().is_some() {
        return s;
    }
    let mut eig = SymmetricEigen::new(s);
    if eig.eigenvalues.min() >= 0.0 {
        return s;
    }
    eig.eigenvalues.iter_mut().for_each(|l| *l = l.max(0.0));
    let out = eig.recompose();
    (out + out.transpose()) * 0.5
}

/// Eigenvalues of a symmetric 3x3 matrix in ascending order (closed form).
pub fn sym3_eigenvalues(a: &Matrix3<f64>) -> [f64; 3] {
    let p1 = a[(0, 1)].powi(2) + a[(0, 2)].powi(2) + a[(1, 2)].powi(2);
    if p1 == 0.0 {
        let mut d = [a[(0, 0)], a[(1, 1)], a[(2, 2)]];
        d.sort_by(f64::total_cmp);
        return d;
    }
    let q = a.trace() / 3.0;
    let p2 = (a[(0, 0)] - q).powi(2) + (a[(1, 1)] - q).powi(2) + (a[(2, 2)] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let b = (a - Matrix3::identity() * q) / p;
    let r = (b.determinant() / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let hi = q + 2.0 * p * phi.cos();
    let lo = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    let mid = 3.0 * q - hi - lo;
    [lo, mid, hi]
}

/// Largest eigenvalue of a symmetric 3x3 matrix.
pub fn max_eigenvalue(a: &Matrix3<f64>) -> f64 {
    sym3_eigenvalues(a)[2]
}

/// Lifts a 2-D lidar return into the global frame:
/// `T_{G,C}(s) * T_{C,L} * [x, y, 0, 1]^T`, with the propagated covariance.
pub fn lift_point(scan_point: &Vector2<f64>, pose: &Pose, params: &CalibParams) -> Result<WorldPoint> {
    if !scan_point.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidInput("non-finite scan point".into()));
    }
    params.validate()?;
    pose.validate()?;
    let calib = calib_to_transform(params)?;
    let lifter = ScanLifter::new(pose, &calib, params.scale);
    Ok(WorldPoint {
        position: lifter.position(scan_point),
        cov: lifter.covariance(scan_point),
        t: pose.t,
        source: (0, 0),
    })
}

/// World-frame covariance `J Q J^T` of a lifted point, where `J` is the
/// central-difference Jacobian w.r.t. the pose parameters.
pub fn propagate_covariance(scan_point: &Vector2<f64>, pose: &Pose, params: &CalibParams) -> Result<Matrix3<f64>> {
    params.validate()?;
    pose.validate()?;
    let calib = calib_to_transform(params)?;
    Ok(ScanLifter::new(pose, &calib, params.scale).covariance(scan_point))
}

/// The finite-difference Jacobian used by [`propagate_covariance`].
pub fn lift_jacobian(scan_point: &Vector2<f64>, pose: &Pose, params: &CalibParams) -> Result<Matrix3x6<f64>> {
    params.validate()?;
    let calib = calib_to_transform(params)?;
    let mut p = pose.clone();
    // force the perturbed chains to be built even for a zero covariance
    p.cov = Matrix6::identity();
    Ok(ScanLifter::new(&p, &calib, params.scale).jacobian(scan_point))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn zero_pose_is_identity() {
        let t = pose_to_transform(&Pose::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0), 1.0).unwrap();
        assert_eq!(t, Transform::identity());
    }

    #[test]
    fn scale_acts_on_translation_only() {
        let t = pose_to_transform(&Pose::new(0.0, 1.0, 2.0, 3.0, 0.0, 0.0, 0.0), 0.5).unwrap();
        assert_eq!(t.translation(), Vector3::new(0.5, 1.0, 1.5));
        assert_eq!(t.rotation(), Matrix3::identity());
    }

    #[test]
    fn quarter_turn_yaw() {
        let t = pose_to_transform(&Pose::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, PI / 2.0), 1.0).unwrap();
        let q = t.apply(&Vector3::x());
        assert_relative_eq!(q, Vector3::y(), epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = Pose::new(0.0, f64::NAN, 0.0, 0.0, 0.0, 0.0, 0.0);
        assert!(pose_to_transform(&p, 1.0).is_err());
        assert!(pose_to_transform(&Pose::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0), 0.0).is_err());
        assert!(calib_to_transform(&CalibParams::new(f64::INFINITY, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0)).is_err());
        let mut q = Pose::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        q.cov[(0, 0)] = -1.0;
        assert!(propagate_covariance(&Vector2::new(1.0, 0.0), &q, &CalibParams::identity()).is_err());
    }

    #[test]
    fn calib_transform_ignores_scale() {
        assert_eq!(calib_to_transform(&CalibParams::identity()).unwrap(), Transform::identity());
        let t = calib_to_transform(&CalibParams::new(0.1, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0)).unwrap();
        assert_eq!(t.translation(), Vector3::new(0.1, 0.0, 0.0));
        assert_eq!(t.rotation(), Matrix3::identity());
    }

    #[test]
    fn lift_simple_cases() {
        let id = CalibParams::identity();
        let p = lift_point(&Vector2::new(1.0, 0.0), &Pose::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0), &id).unwrap();
        assert_eq!(p.position, Vector3::new(1.0, 0.0, 0.0));
        let p = lift_point(&Vector2::new(1.0, 0.0), &Pose::new(0.0, 0.0, 0.0, 5.0, 0.0, 0.0, 0.0), &id).unwrap();
        assert_eq!(p.position, Vector3::new(1.0, 0.0, 5.0));
    }

    #[test]
    fn zero_q_gives_zero_sigma() {
        let pose = Pose::new(0.0, 1.0, 2.0, 3.0, 0.3, -0.2, 0.1);
        let c = propagate_covariance(&Vector2::new(2.0, 1.0), &pose, &CalibParams::new(0.1, 0.2, 0.3, 0.1, 0.2, 0.3, 1.3)).unwrap();
        assert_eq!(c, Matrix3::zeros());
    }

    #[test]
    fn translation_block_for_identity_rotation() {
        let sigma2 = 0.0025;
        let mut pose = Pose::new(0.0, 1.0, -2.0, 0.5, 0.0, 0.0, 0.0);
        pose.cov = Matrix6::from_diagonal(&nalgebra::Vector6::new(sigma2, sigma2, sigma2, 0.0, 0.0, 0.0));
        let params = CalibParams::new(0.1, -0.2, 0.05, 0.3, 0.2, -0.4, 1.0);
        let c = propagate_covariance(&Vector2::new(3.0, 1.0), &pose, &params).unwrap();
        assert_eq!(c, Matrix3::identity() * sigma2);
        let j = lift_jacobian(&Vector2::new(3.0, 1.0), &pose, &params).unwrap();
        assert_eq!(j.fixed_view::<3, 3>(0, 0).into_owned(), Matrix3::identity());
    }

    #[test]
    fn gimbal_lock_sets_roll_zero() {
        let r = euler_to_rotation(0.3, PI / 2.0, 0.5);
        let (roll, pitch, yaw) = rotation_to_euler(&r);
        assert_eq!(roll, 0.0);
        assert_relative_eq!(pitch, PI / 2.0, epsilon = 1e-7);
        assert_relative_eq!(euler_to_rotation(roll, pitch, yaw), r, epsilon = 1e-7);
    }

    #[test]
    fn wrap_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert_relative_eq!(wrap_angle(-PI), PI);
        assert_relative_eq!(wrap_angle(3.0 * PI / 2.0), -PI / 2.0);
        assert_eq!(wrap_angle(0.25), 0.25);
    }

    #[test]
    fn closed_form_eigenvalues_match_nalgebra() {
        let m = Matrix3::new(0.02, 0.003, -0.001, 0.003, 0.01, 0.002, -0.001, 0.002, 0.005);
        let mut ev: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        let ours = sym3_eigenvalues(&m);
        for (a, b) in ours.iter().zip(&ev) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn clamp_removes_negative_eigenvalue() {
        let m = Matrix3::from_diagonal(&Vector3::new(1.0, -1e-9, 2.0));
        let c = condition_covariance(&m);
        assert!(sym3_eigenvalues(&c)[0] >= -1e-15);
    }

    fn angle() -> impl Strategy<Value = f64> {
        -PI..PI
    }

    proptest! {
        #[test]
        fn calib_round_trip(x in -1.0..1.0f64, y in -1.0..1.0f64, z in -1.0..1.0f64,
                            r in angle(), p in (-PI / 2.0 + 0.1)..(PI / 2.0 - 0.1), w in angle(),
                            s in 0.1..5.0f64) {
            let c = CalibParams::new(x, y, z, r, p, w, s);
            let back = transform_to_calib(&calib_to_transform(&c).unwrap(), s);
            let a = c.normalized().to_array();
            let b = back.to_array();
            for i in 0..7 {
                let d = if (3..6).contains(&i) { wrap_angle(a[i] - b[i]) } else { a[i] - b[i] };
                prop_assert!(d.abs() < 1e-9, "component {i}: {} vs {}", a[i], b[i]);
            }
        }

        #[test]
        fn rotation_independent_of_scale(r in angle(), p in angle(), w in angle(), s in 0.01..10.0f64,
                                         x in -5.0..5.0f64) {
            let pose = Pose::new(0.0, x, -x, 2.0 * x, r, p, w);
            let a = pose_to_transform(&pose, s).unwrap();
            let b = pose_to_transform(&pose, 1.0).unwrap();
            prop_assert_eq!(a.rotation(), b.rotation());
            prop_assert!(a.is_valid(1e-9));
        }

        #[test]
        fn lift_commutes_with_composition(r in angle(), p in angle(), w in angle(),
                                          px in -5.0..5.0f64, py in -5.0..5.0f64) {
            let pose = Pose::new(0.0, 1.0, 2.0, 3.0, r, p, w);
            let params = CalibParams::new(0.2, -0.1, 0.3, w, r * 0.5, p, 1.7);
            let lifted = lift_point(&Vector2::new(px, py), &pose, &params).unwrap().position;
            let composed = pose_to_transform(&pose, 1.7).unwrap() * calib_to_transform(&params).unwrap();
            let direct = composed.apply(&Vector3::new(px, py, 0.0));
            prop_assert!((lifted - direct).norm() < 1e-10);
        }
    }
}
