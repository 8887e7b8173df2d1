//! WebAssembly bindings for the browser demo in `www/`.
//!
//! [`Session`] does the work and is plain Rust, so it can be tested natively;
//! [`Demo`] only converts errors for JavaScript. Angles cross the boundary in
//! degrees and time offsets in milliseconds; everything else is SI.

use rqe_calib::entropy::{CloudBuilder, CloudConfig};
use rqe_calib::geometry::{CalibParams, Pose, Scan};
use rqe_calib::optimizer::{align_streams, RotationInterp};
use rqe_calib::simulator::{build_environment, default_truth, make_dataset, Dataset, LidarModel, NoiseModel, TrajectorySpec};
use rqe_calib::{Error, Result};
use wasm_bindgen::prelude::*;

const INTERP: RotationInterp = RotationInterp::Geodesic;

/// Display units to internal units for parameter `i`.
fn unit(i: usize) -> f64 {
    if (3..6).contains(&i) {
        1f64.to_radians()
    } else {
        1.0
    }
}

fn offsets(half: f64, steps: usize) -> impl Iterator<Item = f64> {
    (0..steps).map(move |k| -half + 2.0 * half * k as f64 / (steps - 1) as f64)
}

/// Scans that stay inside the trajectory for every offset in `[lo, hi]`, so
/// each point of a time curve is scored on the same scans.
fn stable_scans(scans: &[Scan], poses: &[Pose], lo: f64, hi: f64) -> Vec<Scan> {
    let (Some(first), Some(last)) = (poses.first(), poses.last()) else {
        return Vec::new();
    };
    scans.iter().filter(|s| s.t - hi >= first.t && s.t - lo <= last.t).cloned().collect()
}

pub struct Session {
    data: Dataset,
    cfg: CloudConfig,
    builder: CloudBuilder,
}

impl Session {
    pub fn new(env: &str, seed: u64, duration: f64, noisy: bool, td_ms: f64, stride: usize, sigma: f64) -> Result<Self> {
        let environment = build_environment(env)?;
        let spec = TrajectorySpec::randomized(&environment, duration, seed);
        let noise = if noisy { NoiseModel { seed, ..NoiseModel::default() } } else { NoiseModel::none() };
        let data = make_dataset(&environment, &spec, &LidarModel::default(), &noise, &default_truth(), td_ms * 1e-3)?;
        let cfg = CloudConfig { subsample_stride: stride.max(1), sigma_kernel: sigma, ..CloudConfig::default() };
        cfg.validate()?;
        let (scans, poses) = align_streams(&data.scans, &data.poses, data.time_offset, INTERP)?;
        let builder = CloudBuilder::new(&scans, &poses, &cfg, &data.truth)?;
        Ok(Session { data, cfg, builder })
    }

    pub fn num_points(&self) -> usize {
        self.builder.num_points()
    }

    pub fn truth(&self) -> Vec<f64> {
        let mut v: Vec<f64> = (0..7).map(|i| self.data.truth.get(i) / unit(i)).collect();
        v.push(self.data.time_offset * 1e3);
        v
    }

    pub fn cost_slice(&self, param: usize, half: f64, steps: usize) -> Result<Vec<f64>> {
        if param >= 7 || steps < 2 {
            return Err(Error::InvalidInput("param must be in 0..7 and steps >= 2".into()));
        }
        let t = &self.data.truth;
        offsets(half, steps).map(|o| self.builder.cost(&t.with(param, t.get(param) + o * unit(param)), &self.cfg)).collect()
    }

    pub fn cloud(&self, delta: &[f64]) -> Result<Vec<f32>> {
        let c = self.builder.build(&self.moved(delta)?)?;
        Ok(c.positions().flat_map(|v| [v.x as f32, v.y as f32, v.z as f32]).collect())
    }

    pub fn time_curve(&self, half_ms: f64, steps: usize, delta: &[f64]) -> Result<Vec<f64>> {
        if steps < 2 || !(half_ms > 0.0) {
            return Err(Error::InvalidInput("need half_ms > 0 and steps >= 2".into()));
        }
        let p = self.moved(delta)?;
        let td0 = self.data.time_offset;
        let scans = stable_scans(&self.data.scans, &self.data.poses, td0 - half_ms * 1e-3, td0 + half_ms * 1e-3);
        offsets(half_ms, steps)
            .map(|o| {
                let (s, q) = align_streams(&scans, &self.data.poses, td0 + o * 1e-3, INTERP)?;
                CloudBuilder::new(&s, &q, &self.cfg, &p)?.cost(&p, &self.cfg)
            })
            .collect()
    }

    fn moved(&self, delta: &[f64]) -> Result<CalibParams> {
        if delta.len() != 7 {
            return Err(Error::InvalidInput(format!("delta needs 7 values, got {}", delta.len())));
        }
        let t = &self.data.truth;
        let v: Vec<f64> = (0..7).map(|i| t.get(i) + delta[i] * unit(i)).collect();
        let p = CalibParams::new(v[0], v[1], v[2], v[3], v[4], v[5], v[6]);
        p.validate()?;
        Ok(p)
    }
}

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct Demo(Session);

#[wasm_bindgen]
impl Demo {
    /// Simulates `duration` seconds with the default ground truth and a lidar
    /// clock offset of `td_ms`.
    #[wasm_bindgen(constructor)]
    pub fn new(env: &str, seed: u32, duration: f64, noisy: bool, td_ms: f64, stride: u32, sigma: f64) -> std::result::Result<Demo, JsError> {
        Session::new(env, seed as u64, duration, noisy, td_ms, stride as usize, sigma).map(Demo).map_err(js)
    }

    #[wasm_bindgen(js_name = numPoints)]
    pub fn num_points(&self) -> usize {
        self.0.num_points()
    }

    /// x, y, z (m), phi, theta, psi (deg), s, td (ms).
    pub fn truth(&self) -> Vec<f64> {
        self.0.truth()
    }

    /// Cost at `steps` offsets in `[-half, half]` from the truth along one parameter.
    #[wasm_bindgen(js_name = costSlice)]
    pub fn cost_slice(&self, param: usize, half: f64, steps: usize) -> std::result::Result<Vec<f64>, JsError> {
        self.0.cost_slice(param, half, steps).map_err(js)
    }

    /// Flat xyz positions for the truth moved by `delta`.
    pub fn cloud(&self, delta: &[f64]) -> std::result::Result<Vec<f32>, JsError> {
        self.0.cloud(delta).map_err(js)
    }

    /// Cost over time offsets around the injected one, calibration fixed at
    /// the truth moved by `delta`.
    #[wasm_bindgen(js_name = timeCurve)]
    pub fn time_curve(&self, half_ms: f64, steps: usize, delta: &[f64]) -> std::result::Result<Vec<f64>, JsError> {
        self.0.time_curve(half_ms, steps, delta).map_err(js)
    }
}
