//! Calibration parameter files, result files and error evaluation.
//!
//! Parameter files are `key = value` text with keys `x y z` (m), `phi theta
//! psi` (rad), `s` and optionally `td` (s). Result files use the same keys plus
//! run statistics, so either can be passed wherever parameters are expected.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::text::{fmt_f64, parse_error, parse_f64, parse_key_values, read_text, write_text};
use crate::error::{Error, Result};
use crate::geometry::{wrap_angle, CalibParams};
use crate::optimizer::CalibResult;

pub const RESULT_FORMAT_VERSION: u32 = 1;

/// Calibration parameters plus an optional time offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamsFile {
    pub params: CalibParams,
    pub time_offset: Option<f64>,
}

pub fn format_params(params: &CalibParams, time_offset: Option<f64>) -> String {
    let mut out = String::new();
    for (name, v) in CalibParams::NAMES.iter().zip(params.to_array()) {
        let _ = writeln!(out, "{name} = {}", fmt_f64(v));
    }
    if let Some(td) = time_offset {
        let _ = writeln!(out, "td = {}", fmt_f64(td));
    }
    out
}

pub fn parse_params(path: &Path, text: &str) -> Result<ParamsFile> {
    let kv = parse_key_values(path, text)?;
    let lookup = |key: &str| kv.iter().find(|(_, k, _)| k == key);
    let mut a = [0.0; 7];
    for (slot, name) in a.iter_mut().zip(CalibParams::NAMES) {
        let (line, _, v) = lookup(name).ok_or_else(|| parse_error(path, 0, format!("missing parameter `{name}`")))?;
        *slot = parse_f64(path, *line, v, name)?;
    }
    let time_offset = match lookup("td") {
        Some((line, _, v)) => Some(parse_f64(path, *line, v, "td")?),
        None => None,
    };
    let params = CalibParams::from_array(a);
    params.validate().map_err(|e| parse_error(path, 0, e.to_string()))?;
    Ok(ParamsFile { params, time_offset })
}

pub fn read_params(path: &Path) -> Result<ParamsFile> {
    parse_params(path, &read_text(path)?)
}

pub fn write_params(path: &Path, params: &CalibParams, time_offset: Option<f64>) -> Result<()> {
    write_text(path, &format_params(params, time_offset))
}

pub fn format_result(r: &CalibResult) -> String {
    let mut out = format!("# calibration result\nformat_version = {RESULT_FORMAT_VERSION}\n");
    out += &format_params(&r.params, r.time_offset);
    let p = &r.params;
    let _ = writeln!(
        out,
        "# report: phi {:.4} deg, theta {:.4} deg, psi {:.4} deg",
        p.roll.to_degrees(),
        p.pitch.to_degrees(),
        p.yaw.to_degrees()
    );
    let _ = writeln!(out, "cost = {}", fmt_f64(r.cost));
    let _ = writeln!(out, "num_points = {}", r.num_points);
    let _ = writeln!(out, "crs_evals = {}", r.crs_evals);
    let _ = writeln!(out, "nm_evals = {}", r.nm_evals);
    let _ = writeln!(out, "time_align_s = {:.3}", r.time_align_s);
    let _ = writeln!(out, "crs_s = {:.3}", r.crs_s);
    let _ = writeln!(out, "nm_s = {:.3}", r.nm_s);
    let _ = writeln!(out, "input_digest = {}", r.input_digest);
    for (k, v) in &r.config {
        let _ = writeln!(out, "config.{k} = {v}");
    }
    out
}

/// Writes the text form to `path` and the JSON form (including the full cost
/// trace) next to it with `.json` appended.
pub fn write_result(path: &Path, r: &CalibResult) -> Result<PathBuf> {
    write_text(path, &format_result(r))?;
    let json_path = PathBuf::from(format!("{}.json", path.display()));
    let json = serde_json::to_string_pretty(r).map_err(|e| Error::InvalidInput(format!("serializing result: {e}")))?;
    write_text(&json_path, &json)?;
    Ok(json_path)
}

pub fn read_result_json(path: &Path) -> Result<CalibResult> {
    serde_json::from_str(&read_text(path)?).map_err(|e| parse_error(path, e.line(), e.to_string()))
}

/// Absolute per-parameter errors. Angles are wrapped to (-pi, pi] first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamErrors {
    /// m
    pub translation: [f64; 3],
    /// rad
    pub rotation: [f64; 3],
    pub scale: f64,
    /// s
    pub time_offset: Option<f64>,
}

impl ParamErrors {
    pub fn max_translation(&self) -> f64 {
        self.translation.iter().copied().fold(0.0, f64::max)
    }

    pub fn max_rotation(&self) -> f64 {
        self.rotation.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.max_translation() == 0.0 && self.max_rotation() == 0.0 && self.scale == 0.0 && self.time_offset.unwrap_or(0.0) == 0.0
    }

    pub const HEADER: &'static str = "x_mm y_mm z_mm phi_deg theta_deg psi_deg s td_ms";

    /// One row in mm / deg / unitless / ms.
    pub fn row(&self) -> String {
        let t = self.translation.map(|v| format!("{:.4}", v * 1e3));
        let r = self.rotation.map(|v| format!("{:.5}", v.to_degrees()));
        let td = self.time_offset.map_or("-".to_string(), |v| format!("{:.4}", v * 1e3));
        format!("{} {} {} {} {} {} {:.6e} {}", t[0], t[1], t[2], r[0], r[1], r[2], self.scale, td)
    }
}

pub fn evaluate(estimate: &ParamsFile, truth: &ParamsFile) -> ParamErrors {
    let (a, b) = (&estimate.params, &truth.params);
    ParamErrors {
        translation: [(a.x - b.x).abs(), (a.y - b.y).abs(), (a.z - b.z).abs()],
        rotation: [
            wrap_angle(a.roll - b.roll).abs(),
            wrap_angle(a.pitch - b.pitch).abs(),
            wrap_angle(a.yaw - b.yaw).abs(),
        ],
        scale: (a.scale - b.scale).abs(),
        time_offset: match (estimate.time_offset, truth.time_offset) {
            (Some(x), Some(y)) => Some((x - y).abs()),
            _ => None,
        },
    }
}
