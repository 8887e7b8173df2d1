//! Derivative-free search over the calibration parameters.
//!
//! The search runs in "search coordinates": the seven calibration parameters
//! with the scale replaced by its logarithm, so every point of the box maps
//! to a positive scale. A coarse controlled random search over the whole box
//! is followed by a Nelder-Mead polish from the best point found.

mod crs;
mod nelder_mead;
mod pipeline;
mod time;

pub use crs::crs_search;
pub use nelder_mead::nelder_mead;
pub use pipeline::{
    calibrate, calibrate_streams, calibrate_with_time, check_observability, dataset_digest, CalibResult, ObservabilityWarning,
};
pub use time::{align_streams, interpolate_pose, time_align, RotationInterp, TimeAlignConfig, TimeAlignResult};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::CalibParams;

pub const DIM: usize = 7;

/// Box bounds in search coordinates plus the initial guess.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub lower: [f64; DIM],
    pub upper: [f64; DIM],
    pub seed: CalibParams,
    pub rng_seed: u64,
}

impl SearchSpace {
    /// Default box: +/-0.5 m, +/-15 deg, scale within a factor of 4 of the seed.
    pub fn around(seed: CalibParams, rng_seed: u64) -> Self {
        Self::with_half_widths(seed, 0.5, 15f64.to_radians(), 4f64.ln(), rng_seed)
    }

    pub fn with_half_widths(seed: CalibParams, trans: f64, rot: f64, log_scale: f64, rng_seed: u64) -> Self {
        let c = seed.to_search_vector();
        let half = [trans, trans, trans, rot, rot, rot, log_scale];
        SearchSpace {
            lower: std::array::from_fn(|i| c[i] - half[i]),
            upper: std::array::from_fn(|i| c[i] + half[i]),
            seed,
            rng_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let s = self.seed.to_search_vector();
        for i in 0..DIM {
            if !(self.lower[i] < self.upper[i]) || !self.lower[i].is_finite() || !self.upper[i].is_finite() {
                return Err(Error::Config(format!("bad bounds for {}: [{}, {}]", CalibParams::NAMES[i], self.lower[i], self.upper[i])));
            }
            if !(self.lower[i] <= s[i] && s[i] <= self.upper[i]) {
                return Err(Error::Config(format!("seed {} = {} outside bounds", CalibParams::NAMES[i], s[i])));
            }
        }
        Ok(())
    }

    pub fn widths(&self) -> [f64; DIM] {
        std::array::from_fn(|i| self.upper[i] - self.lower[i])
    }

    pub fn contains(&self, v: &[f64]) -> bool {
        v.iter().enumerate().all(|(i, &x)| x >= self.lower[i] && x <= self.upper[i])
    }

    pub fn clamp(&self, v: &mut [f64]) {
        for (i, x) in v.iter_mut().enumerate() {
            *x = x.clamp(self.lower[i], self.upper[i]);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub crs_population: usize,
    pub crs_max_evals: usize,
    /// Stop CRS once `(f_worst - f_best) <= crs_ftol * |f_best|`.
    pub crs_ftol: f64,
    /// Use every n-th scan during the CRS stage only.
    pub crs_scan_stride: usize,
    /// Per-parameter convergence tolerance of the simplex, in search coordinates.
    pub nm_xtol: [f64; DIM],
    pub nm_ftol: f64,
    pub nm_max_evals: usize,
    /// Initial simplex edge as a fraction of each bound width.
    pub nm_step_fraction: f64,
    /// Kernel widths for extra Nelder-Mead passes after the main one, each
    /// started from the previous optimum. Empty by default.
    #[serde(default)]
    pub nm_sigma_schedule: Vec<f64>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            crs_population: 10 * (DIM + 1),
            crs_max_evals: 3000,
            crs_ftol: 1e-7,
            crs_scan_stride: 1,
            nm_xtol: [1e-4, 1e-4, 1e-4, 1e-4, 1e-4, 1e-4, 1e-5],
            nm_ftol: 1e-13,
            nm_max_evals: 2000,
            nm_step_fraction: 0.1,
            nm_sigma_schedule: Vec::new(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.crs_population < 10 * (dim + 1) {
            return Err(Error::Config(format!("crs_population must be >= {}", 10 * (dim + 1))));
        }
        if self.nm_xtol.iter().any(|&t| !(t > 0.0)) || !(self.nm_ftol > 0.0) || !(self.crs_ftol >= 0.0) {
            return Err(Error::Config("tolerances must be positive".into()));
        }
        if self.nm_sigma_schedule.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::Config("nm_sigma_schedule entries must be positive".into()));
        }
        if self.crs_scan_stride == 0 || !(self.nm_step_fraction > 0.0) {
            return Err(Error::Config("crs_scan_stride and nm_step_fraction must be positive".into()));
        }
        Ok(())
    }
}

/// One objective evaluation as seen by an optimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub eval: usize,
    pub cost: f64,
    pub best: f64,
}

/// Result of a single optimizer run.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
    pub trace: Vec<TraceEntry>,
}

/// Wraps an objective: maps non-finite values to +inf and records the trace
/// and the best point seen.
pub(crate) struct Tracked<F> {
    f: F,
    pub evals: usize,
    pub best_x: Vec<f64>,
    pub best_f: f64,
    pub trace: Vec<TraceEntry>,
}

impl<F: FnMut(&[f64]) -> f64> Tracked<F> {
    pub fn new(f: F) -> Self {
        Tracked { f, evals: 0, best_x: Vec::new(), best_f: f64::INFINITY, trace: Vec::new() }
    }

    pub fn eval(&mut self, x: &[f64]) -> f64 {
        let mut v = (self.f)(x);
        if !v.is_finite() {
            v = f64::INFINITY;
        }
        self.evals += 1;
        if v < self.best_f || self.best_x.is_empty() {
            self.best_f = v.min(self.best_f);
            self.best_x = x.to_vec();
        }
        self.trace.push(TraceEntry { eval: self.evals, cost: v, best: self.best_f });
        v
    }

    pub fn outcome(self) -> OptimizeOutcome {
        OptimizeOutcome { x: self.best_x, f: self.best_f, evals: self.evals, trace: self.trace }
    }
}
