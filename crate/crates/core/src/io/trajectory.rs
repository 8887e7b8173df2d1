//! Pose and scan files.
//!
//! Pose file: one pose per line, `t x y z phi theta psi` optionally followed by
//! the 36 row-major entries of the pose covariance. Scan file: one return per
//! line, `t beam x y valid`; consecutive lines with the same `t` form a scan.
//! Both accept `#` comments and blank lines, and both require timestamps to
//! increase.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Matrix6, Vector2};

use super::text::{data_lines, fmt_f64, parse_error, parse_f64, read_text, write_text};
use crate::error::{Error, Result};
use crate::geometry::{LidarReturn, Pose, Scan};

pub fn format_poses(poses: &[Pose]) -> String {
    let mut out = String::from("# t x y z phi theta psi [36 covariance entries, row-major]\n");
    for p in poses {
        let mut fields: Vec<String> = std::iter::once(p.t).chain(p.vector()).map(fmt_f64).collect();
        if p.cov.iter().any(|&v| v != 0.0) {
            // nalgebra stores column-major; the file is row-major
            fields.extend(p.cov.transpose().iter().map(|&v| fmt_f64(v)));
        }
        out.push_str(&fields.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_poses(path: &Path, text: &str) -> Result<Vec<Pose>> {
    let mut poses: Vec<Pose> = Vec::new();
    for (line, l) in data_lines(text) {
        let fields: Vec<&str> = l.split_whitespace().collect();
        if fields.len() != 7 && fields.len() != 43 {
            return Err(parse_error(path, line, format!("expected 7 or 43 fields, found {}", fields.len())));
        }
        let vals = fields
            .iter()
            .enumerate()
            .map(|(i, f)| parse_f64(path, line, f, &format!("field {}", i + 1)))
            .collect::<Result<Vec<f64>>>()?;
        let cov = if vals.len() == 43 { Matrix6::from_row_slice(&vals[7..]) } else { Matrix6::zeros() };
        let v: [f64; 6] = vals[1..7].try_into().expect("six pose values");
        let pose = Pose::from_vector(vals[0], &v, cov);
        pose.validate().map_err(|e| parse_error(path, line, e.to_string()))?;
        if let Some(prev) = poses.last() {
            if !(pose.t > prev.t) {
                return Err(Error::Ordering { path: path.to_path_buf(), line, prev: prev.t, next: pose.t });
            }
        }
        poses.push(pose);
    }
    Ok(poses)
}

pub fn write_poses(path: &Path, poses: &[Pose]) -> Result<()> {
    write_text(path, &format_poses(poses))
}

pub fn read_poses(path: &Path) -> Result<Vec<Pose>> {
    parse_poses(path, &read_text(path)?)
}

pub fn format_scans(scans: &[Scan]) -> String {
    let mut out = String::from("# t beam x y valid\n");
    for s in scans {
        let t = fmt_f64(s.t);
        for r in &s.returns {
            let _ = writeln!(out, "{t} {} {} {} {}", r.beam, fmt_f64(r.point.x), fmt_f64(r.point.y), r.valid as u8);
        }
    }
    out
}

pub fn parse_scans(path: &Path, text: &str) -> Result<Vec<Scan>> {
    let mut scans: Vec<Scan> = Vec::new();
    for (line, l) in data_lines(text) {
        let f: Vec<&str> = l.split_whitespace().collect();
        if f.len() != 5 {
            return Err(parse_error(path, line, format!("expected 5 fields, found {}", f.len())));
        }
        let t = parse_f64(path, line, f[0], "timestamp")?;
        let beam = f[1].parse::<u32>().map_err(|_| parse_error(path, line, format!("beam index `{}`", f[1])))?;
        let x = parse_f64(path, line, f[2], "x")?;
        let y = parse_f64(path, line, f[3], "y")?;
        let valid = match f[4] {
            "1" => true,
            "0" => false,
            other => return Err(parse_error(path, line, format!("valid flag must be 0 or 1, got `{other}`"))),
        };
        if !t.is_finite() || (valid && !(x.is_finite() && y.is_finite())) {
            return Err(parse_error(path, line, "non-finite value"));
        }
        let ret = LidarReturn { beam, point: Vector2::new(x, y), valid };
        match scans.last_mut() {
            Some(s) if s.t == t => s.returns.push(ret),
            Some(s) if !(t > s.t) => {
                return Err(Error::Ordering { path: path.to_path_buf(), line, prev: s.t, next: t });
            }
            _ => scans.push(Scan { t, returns: vec![ret] }),
        }
    }
    if scans.is_empty() {
        log::warn!("{}: no scans", path.display());
    }
    Ok(scans)
}

pub fn write_scans(path: &Path, scans: &[Scan]) -> Result<()> {
    write_text(path, &format_scans(scans))
}

pub fn read_scans(path: &Path) -> Result<Vec<Scan>> {
    parse_scans(path, &read_text(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("test.txt")
    }

    #[test]
    fn identity_pose_line() {
        let poses = parse_poses(p(), "0.0 0 0 0 0 0 0\n").unwrap();
        assert_eq!(poses, vec![Pose::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)]);
    }

    #[test]
    fn descending_timestamps_rejected_at_first_violation() {
        let text = "# header\n0 0 0 0 0 0 0\n1 0 0 0 0 0 0\n0.5 0 0 0 0 0 0\n0.2 0 0 0 0 0 0\n";
        match parse_poses(p(), text) {
            Err(Error::Ordering { line, prev, next, .. }) => assert_eq!((line, prev, next), (4, 1.0, 0.5)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_lines_report_line_number() {
        assert!(matches!(parse_poses(p(), "0 0 0 0 0 0 0\n1 0 0 x 0 0 0"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(parse_poses(p(), "0 0 0"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_scans(p(), "0 1 2 3 2"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_scans(p(), "0 -1 2 3 1"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn covariance_is_row_major() {
        let mut line = String::from("0 0 0 0 0 0 0");
        let mut cov = Matrix6::<f64>::identity();
        cov[(0, 1)] = 0.5;
        cov[(1, 0)] = 0.5;
        for r in 0..6 {
            for c in 0..6 {
                line += &format!(" {}", cov[(r, c)]);
            }
        }
        let pose = &parse_poses(p(), &line).unwrap()[0];
        assert_eq!(pose.cov, cov);
        let again = parse_poses(p(), &format_poses(std::slice::from_ref(pose))).unwrap();
        assert_eq!(&again[0], pose);
    }

    #[test]
    fn asymmetric_covariance_rejected() {
        let mut line = String::from("0 0 0 0 0 0 0");
        for k in 0..36 {
            line += if k == 1 { " 1" } else { " 0" };
        }
        assert!(matches!(parse_poses(p(), &line), Err(Error::Parse { .. })));
    }

    #[test]
    fn scans_group_by_time() {
        let text = "0 0 1 0 1\n0 1 0 1 0\n0.025 0 2 0 1\n";
        let scans = parse_scans(p(), text).unwrap();
        assert_eq!(scans.len(), 2);
        assert_eq!(scans[0].returns.len(), 2);
        assert_eq!(scans[0].returns[1].beam, 1);
        assert!(!scans[0].returns[1].valid);
        assert!(matches!(parse_scans(p(), "1 0 1 0 1\n0 0 1 0 1"), Err(Error::Ordering { line: 2, .. })));
    }

    #[test]
    fn empty_and_single_return() {
        assert!(parse_scans(p(), "").unwrap().is_empty());
        let s = parse_scans(p(), "0 0 1.5 -2 1").unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].returns.len(), 1);
        assert_eq!(s[0].returns[0].point, Vector2::new(1.5, -2.0));
    }
}
