//! Run configuration as flat `key = value` text.
//!
//! Every field of the cloud, optimizer, time-alignment and search settings
//! has a key; omitted keys keep their defaults and unknown keys are errors.
//! Angles are given in degrees and time offsets in milliseconds.

use std::path::Path;

use super::text::{parse_error, parse_key_values, read_text};
use crate::entropy::{CloudConfig, PruneBound};
use crate::error::{Error, Result};
use crate::geometry::CalibParams;
use crate::optimizer::{OptimizerConfig, RotationInterp, SearchSpace, TimeAlignConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub cloud: CloudConfig,
    pub optimizer: OptimizerConfig,
    pub time: TimeAlignConfig,
    /// Run temporal pre-calibration before the spatial search.
    pub estimate_time_offset: bool,
    pub seed: CalibParams,
    /// Half widths of the search box: m, rad, log-scale.
    pub half_width: [f64; 3],
    pub rng_seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            cloud: CloudConfig::default(),
            optimizer: OptimizerConfig::default(),
            time: TimeAlignConfig::default(),
            estimate_time_offset: false,
            seed: CalibParams::identity(),
            half_width: [0.5, 15f64.to_radians(), 4f64.ln()],
            rng_seed: 0,
        }
    }
}

fn list(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

impl RunConfig {
    pub fn space(&self) -> SearchSpace {
        let [t, r, s] = self.half_width;
        SearchSpace::with_half_widths(self.seed, t, r, s, self.rng_seed)
    }

    pub fn validate(&self) -> Result<()> {
        self.cloud.validate()?;
        self.optimizer.validate(7)?;
        self.time.validate()?;
        self.seed.validate()?;
        if self.half_width.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::Config("search half widths must be positive".into()));
        }
        if !self.estimate_time_offset && self.time != TimeAlignConfig::default() {
            log::warn!("time.* settings are ignored because time.enabled = false");
        }
        self.space().validate()
    }

    /// All settings as `(key, value)` in file syntax.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let c = &self.cloud;
        let o = &self.optimizer;
        let t = &self.time;
        let s = &self.seed;
        let pairs: Vec<(&str, String)> = vec![
            ("cloud.sigma_kernel", c.sigma_kernel.to_string()),
            ("cloud.k_prune", c.k_prune.to_string()),
            ("cloud.prune_bound", match c.prune_bound {
                PruneBound::StdDev => "std_dev".into(),
                PruneBound::Literal => "literal".into(),
            }),
            ("cloud.subsample_stride", c.subsample_stride.to_string()),
            ("cloud.max_points", c.max_points.to_string()),
            ("cloud.range_min", c.range_min.to_string()),
            ("cloud.range_max", c.range_max.to_string()),
            ("cloud.freeze_covariance", c.freeze_covariance.to_string()),
            ("optimizer.crs_population", o.crs_population.to_string()),
            ("optimizer.crs_max_evals", o.crs_max_evals.to_string()),
            ("optimizer.crs_ftol", o.crs_ftol.to_string()),
            ("optimizer.crs_scan_stride", o.crs_scan_stride.to_string()),
            ("optimizer.nm_xtol", list(&o.nm_xtol)),
            ("optimizer.nm_ftol", o.nm_ftol.to_string()),
            ("optimizer.nm_max_evals", o.nm_max_evals.to_string()),
            ("optimizer.nm_step_fraction", o.nm_step_fraction.to_string()),
            ("optimizer.nm_sigma_schedule", list(&o.nm_sigma_schedule)),
            ("time.enabled", self.estimate_time_offset.to_string()),
            ("time.min_offset_ms", (t.min_offset * 1e3).to_string()),
            ("time.max_offset_ms", (t.max_offset * 1e3).to_string()),
            ("time.resolution_ms", (t.resolution * 1e3).to_string()),
            ("time.refine_iters", t.refine_iters.to_string()),
            ("time.rotation_interp", match t.rotation_interp {
                RotationInterp::Geodesic => "geodesic".into(),
                RotationInterp::EulerLinear => "euler_linear".into(),
            }),
            ("search.seed_x", s.x.to_string()),
            ("search.seed_y", s.y.to_string()),
            ("search.seed_z", s.z.to_string()),
            ("search.seed_phi_deg", s.roll.to_degrees().to_string()),
            ("search.seed_theta_deg", s.pitch.to_degrees().to_string()),
            ("search.seed_psi_deg", s.yaw.to_degrees().to_string()),
            ("search.seed_s", s.scale.to_string()),
            ("search.half_width_m", self.half_width[0].to_string()),
            ("search.half_width_deg", self.half_width[1].to_degrees().to_string()),
            ("search.half_width_log_scale", self.half_width[2].to_string()),
            ("search.rng_seed", self.rng_seed.to_string()),
        ];
        pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    pub fn format(&self) -> String {
        let mut out = String::from("# calibration run configuration\n");
        for (k, v) in self.to_pairs() {
            out += &format!("{k} = {v}\n");
        }
        out
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (line, key, v) in parse_key_values(path, text)? {
            let err = |msg: String| parse_error(path, line, msg);
            let f = || v.parse::<f64>().map_err(|_| err(format!("`{key}` expects a number, got `{v}`")));
            let u = || v.parse::<usize>().map_err(|_| err(format!("`{key}` expects a non-negative integer, got `{v}`")));
            let b = || v.parse::<bool>().map_err(|_| err(format!("`{key}` expects true or false, got `{v}`")));
            let floats = || -> Result<Vec<f64>> {
                v.split(|c: char| c.is_whitespace() || c == ',')
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<f64>().map_err(|_| err(format!("`{key}`: `{s}` is not a number"))))
                    .collect()
            };
            let c = &mut cfg.cloud;
            let o = &mut cfg.optimizer;
            let t = &mut cfg.time;
            let s = &mut cfg.seed;
            match key.as_str() {
                "cloud.sigma_kernel" => c.sigma_kernel = f()?,
                "cloud.k_prune" => c.k_prune = f()?,
                "cloud.prune_bound" => {
                    c.prune_bound = match v.as_str() {
                        "std_dev" => PruneBound::StdDev,
                        "literal" => PruneBound::Literal,
                        _ => return Err(err(format!("cloud.prune_bound must be std_dev or literal, got `{v}`"))),
                    }
                }
                "cloud.subsample_stride" => c.subsample_stride = u()?,
                "cloud.max_points" => c.max_points = u()?,
                "cloud.range_min" => c.range_min = f()?,
                "cloud.range_max" => c.range_max = f()?,
                "cloud.freeze_covariance" => c.freeze_covariance = b()?,
                "optimizer.crs_population" => o.crs_population = u()?,
                "optimizer.crs_max_evals" => o.crs_max_evals = u()?,
                "optimizer.crs_ftol" => o.crs_ftol = f()?,
                "optimizer.crs_scan_stride" => o.crs_scan_stride = u()?,
                "optimizer.nm_xtol" => {
                    let xs = floats()?;
                    o.nm_xtol = match xs.len() {
                        1 => [xs[0]; 7],
                        7 => xs.try_into().expect("seven values"),
                        n => return Err(err(format!("optimizer.nm_xtol needs 1 or 7 values, got {n}"))),
                    }
                }
                "optimizer.nm_ftol" => o.nm_ftol = f()?,
                "optimizer.nm_max_evals" => o.nm_max_evals = u()?,
                "optimizer.nm_step_fraction" => o.nm_step_fraction = f()?,
                "optimizer.nm_sigma_schedule" => o.nm_sigma_schedule = floats()?,
                "time.enabled" => cfg.estimate_time_offset = b()?,
                "time.min_offset_ms" => t.min_offset = f()? * 1e-3,
                "time.max_offset_ms" => t.max_offset = f()? * 1e-3,
                "time.resolution_ms" => t.resolution = f()? * 1e-3,
                "time.refine_iters" => t.refine_iters = u()?,
                "time.rotation_interp" => {
                    t.rotation_interp = match v.as_str() {
                        "geodesic" => RotationInterp::Geodesic,
                        "euler_linear" => RotationInterp::EulerLinear,
                        _ => return Err(err(format!("time.rotation_interp must be geodesic or euler_linear, got `{v}`"))),
                    }
                }
                "search.seed_x" => s.x = f()?,
                "search.seed_y" => s.y = f()?,
                "search.seed_z" => s.z = f()?,
                "search.seed_phi_deg" => s.roll = f()?.to_radians(),
                "search.seed_theta_deg" => s.pitch = f()?.to_radians(),
                "search.seed_psi_deg" => s.yaw = f()?.to_radians(),
                "search.seed_s" => s.scale = f()?,
                "search.half_width_m" => cfg.half_width[0] = f()?,
                "search.half_width_deg" => cfg.half_width[1] = f()?.to_radians(),
                "search.half_width_log_scale" => cfg.half_width[2] = f()?,
                "search.rng_seed" => cfg.rng_seed = u()? as u64,
                _ => return Err(err(format!("unknown key `{key}`"))),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(path, &read_text(path)?)
    }
}
