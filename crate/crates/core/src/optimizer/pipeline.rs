//! The calibration cascade: CRS over the box, then Nelder-Mead from its best point.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{crs_search, nelder_mead, time_align, OptimizerConfig, SearchSpace, TimeAlignConfig, TraceEntry, DIM};
use crate::entropy::{CloudBuilder, CloudConfig};
use crate::error::{Error, Result};
use crate::geometry::{CalibParams, Pose, Scan};
use crate::optimizer::align_streams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibResult {
    pub params: CalibParams,
    /// Estimated lidar time offset, when temporal pre-calibration ran.
    pub time_offset: Option<f64>,
    pub cost: f64,
    /// All objective evaluations in order, CRS first. `best` is the running minimum.
    pub trace: Vec<TraceEntry>,
    pub crs_evals: usize,
    pub nm_evals: usize,
    pub time_align_s: f64,
    pub crs_s: f64,
    pub nm_s: f64,
    pub num_points: usize,
    pub input_digest: String,
    /// Configuration as `key = value` pairs, filled in by callers that have one.
    #[serde(default)]
    pub config: Vec<(String, String)>,
}

/// SHA-256 over the raw bits of every scan and pose.
pub fn dataset_digest(scans: &[Scan], poses: &[Pose]) -> String {
    let mut h = Sha256::new();
    for s in scans {
        h.update(s.t.to_le_bytes());
        for r in &s.returns {
            h.update(r.beam.to_le_bytes());
            h.update(r.point.x.to_le_bytes());
            h.update(r.point.y.to_le_bytes());
            h.update([r.valid as u8]);
        }
    }
    for p in poses {
        h.update(p.t.to_le_bytes());
        for v in p.vector().iter().chain(p.cov.iter()) {
            h.update(v.to_le_bytes());
        }
    }
    hex::encode(h.finalize())
}

fn every_nth(scans: &[Scan], poses: &[Pose], n: usize) -> (Vec<Scan>, Vec<Pose>) {
    (scans.iter().step_by(n).cloned().collect(), poses.iter().step_by(n).cloned().collect())
}

fn objective<'a>(b: &'a CloudBuilder, cfg: &'a CloudConfig) -> impl FnMut(&[f64]) -> f64 + 'a {
    move |v: &[f64]| b.cost(&CalibParams::from_search_vector(v), cfg).unwrap_or(f64::INFINITY)
}

/// Estimates the calibration from index-aligned scans and poses.
pub fn calibrate(
    scans: &[Scan],
    poses: &[Pose],
    space: &SearchSpace,
    opt_cfg: &OptimizerConfig,
    cloud_cfg: &CloudConfig,
) -> Result<CalibResult> {
    if poses.len() < 2 {
        return Err(Error::InvalidInput(format!("need at least 2 poses, got {}", poses.len())));
    }
    space.validate()?;
    opt_cfg.validate(DIM)?;
    let builder = CloudBuilder::new(scans, poses, cloud_cfg, &space.seed)?;
    if builder.num_points() == 0 {
        return Err(Error::InvalidInput("no valid lidar returns".into()));
    }

    let t0 = Instant::now();
    let coarse = if opt_cfg.crs_scan_stride > 1 {
        let (s, p) = every_nth(scans, poses, opt_cfg.crs_scan_stride);
        Some(CloudBuilder::new(&s, &p, cloud_cfg, &space.seed)?)
    } else {
        None
    };
    let crs = crs_search(objective(coarse.as_ref().unwrap_or(&builder), cloud_cfg), space, opt_cfg)?;
    let crs_s = t0.elapsed().as_secs_f64();
    log::info!("CRS: {} evaluations, best {:.6e} ({:.1} s)", crs.evals, crs.f, crs_s);

    let t1 = Instant::now();
    let nm = nelder_mead(objective(&builder, cloud_cfg), &crs.x, space, opt_cfg)?;
    log::info!("Nelder-Mead: {} evaluations, best {:.6e}", nm.evals, nm.f);

    // With a coarse stage the two halves of the trace score different point
    // sets, and each annealing pass uses its own kernel; `best` stays the
    // running minimum of the recorded values regardless.
    let mut trace = crs.trace;
    let mut best = crs.f;
    let mut append = |trace: &mut Vec<TraceEntry>, stage: &[TraceEntry]| {
        let offset = trace.len();
        for e in stage {
            best = best.min(e.cost);
            trace.push(TraceEntry { eval: e.eval + offset, cost: e.cost, best });
        }
    };
    append(&mut trace, &nm.trace);
    let mut nm_evals = nm.evals;
    let (mut x, mut cost) = if coarse.is_none() && crs.f < nm.f { (crs.x, crs.f) } else { (nm.x, nm.f) };
    for &sigma in &opt_cfg.nm_sigma_schedule {
        let cfg = CloudConfig { sigma_kernel: sigma, ..cloud_cfg.clone() };
        let local = OptimizerConfig {
            nm_step_fraction: opt_cfg.nm_step_fraction * (sigma / cloud_cfg.sigma_kernel).min(1.0),
            ..opt_cfg.clone()
        };
        let pass = nelder_mead(objective(&builder, &cfg), &x, space, &local)?;
        log::info!("Nelder-Mead at sigma {sigma}: {} evaluations, best {:.6e}", pass.evals, pass.f);
        append(&mut trace, &pass.trace);
        nm_evals += pass.evals;
        x = pass.x;
        cost = pass.f;
    }
    let nm_s = t1.elapsed().as_secs_f64();

    Ok(CalibResult {
        params: CalibParams::from_search_vector(&x).normalized(),
        time_offset: None,
        cost,
        trace,
        crs_evals: crs.evals,
        nm_evals,
        time_align_s: 0.0,
        crs_s,
        nm_s,
        num_points: builder.num_points(),
        input_digest: dataset_digest(scans, poses),
        config: Vec::new(),
    })
}

/// Temporal pre-calibration at the seed, then [`calibrate`] on the re-timed scans.
pub fn calibrate_with_time(
    scans: &[Scan],
    poses: &[Pose],
    space: &SearchSpace,
    opt_cfg: &OptimizerConfig,
    ta_cfg: &TimeAlignConfig,
    cloud_cfg: &CloudConfig,
) -> Result<CalibResult> {
    let t0 = Instant::now();
    let ta = time_align(scans, poses, &space.seed, ta_cfg, cloud_cfg)?;
    let time_align_s = t0.elapsed().as_secs_f64();
    log::info!("time offset {:.3} ms ({:.1} s)", ta.offset * 1e3, time_align_s);
    let (s, p) = align_streams(scans, poses, ta.offset, ta_cfg.rotation_interp)?;
    let mut result = calibrate(&s, &p, space, opt_cfg, cloud_cfg)?;
    result.time_offset = Some(ta.offset);
    result.time_align_s = time_align_s;
    result.input_digest = dataset_digest(scans, poses);
    Ok(result)
}

/// A parameter whose cost slice is too flat to be trusted.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservabilityWarning {
    pub param: &'static str,
    pub variation: f64,
    pub noise: f64,
}

/// Flags parameters whose cost varies by less than ten times the evaluation
/// noise across the search box. The noise is the spread of the cost under
/// perturbations of one part in 10^9 of the bound width around `params`.
pub fn check_observability(
    scans: &[Scan],
    poses: &[Pose],
    params: &CalibParams,
    space: &SearchSpace,
    cloud_cfg: &CloudConfig,
    samples: usize,
) -> Result<Vec<ObservabilityWarning>> {
    let builder = CloudBuilder::new(scans, poses, cloud_cfg, params)?;
    let center = params.to_search_vector();
    let widths = space.widths();
    let cost = |v: &[f64]| builder.cost(&CalibParams::from_search_vector(v), cloud_cfg);
    let mut warnings = Vec::new();
    let samples = samples.max(3);
    for i in 0..DIM {
        let mut vals = Vec::with_capacity(samples);
        for k in 0..samples {
            let mut v = center;
            v[i] = space.lower[i] + widths[i] * k as f64 / (samples - 1) as f64;
            vals.push(cost(&v)?);
        }
        let mut jitter = Vec::with_capacity(5);
        for k in -2i32..=2 {
            let mut v = center;
            v[i] += widths[i] * 1e-9 * k as f64;
            jitter.push(cost(&v)?);
        }
        let spread = |xs: &[f64]| {
            let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            hi - lo
        };
        let variation = spread(&vals);
        let noise = spread(&jitter).max(f64::EPSILON * jitter[2].abs());
        if variation < 10.0 * noise {
            log::warn!("parameter {} looks unobservable (variation {variation:e}, noise {noise:e})", CalibParams::NAMES[i]);
            warnings.push(ObservabilityWarning { param: CalibParams::NAMES[i], variation, noise });
        }
    }
    Ok(warnings)
}

/// Convenience for callers holding unpaired streams: pairs at zero offset then calibrates.
pub fn calibrate_streams(
    scans: &[Scan],
    poses: &[Pose],
    space: &SearchSpace,
    opt_cfg: &OptimizerConfig,
    cloud_cfg: &CloudConfig,
) -> Result<CalibResult> {
    let (s, p) = align_streams(scans, poses, 0.0, Default::default())?;
    let mut r = calibrate(&s, &p, space, opt_cfg, cloud_cfg)?;
    r.input_digest = dataset_digest(scans, poses);
    Ok(r)
}
