//! ASCII PLY clouds and CSV plot data.

use std::fmt::Write as _;
use std::path::Path;

use super::text::{fmt_f64, write_text};
use crate::entropy::GmmCloud;
use crate::error::{Error, Result};

pub fn format_ply(cloud: &GmmCloud) -> Result<String> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let mut out = format!(
        "ply\nformat ascii 1.0\ncomment rqe-calib point cloud\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\nend_header\n",
        cloud.len()
    );
    for p in cloud.positions() {
        let _ = writeln!(out, "{} {} {}", fmt_f64(p.x), fmt_f64(p.y), fmt_f64(p.z));
    }
    Ok(out)
}

pub fn export_ply(cloud: &GmmCloud, path: &Path) -> Result<()> {
    write_text(path, &format_ply(cloud)?)
}

/// Header row plus one comma-separated row per record.
pub fn format_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        let fields: Vec<String> = r.iter().map(|v| v.to_string()).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    write_text(path, &format_csv(header, rows))
}
