//! Dataset bundles: a directory with a manifest, a scan file, a pose file and
//! optionally a ground-truth parameter file.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::result::{read_params, write_params, ParamsFile};
use super::text::{fmt_f64, parse_error, parse_f64, parse_key_values, read_text, sibling, write_text};
use super::trajectory::{read_poses, read_scans, write_poses, write_scans};
use crate::error::{Error, Result};
use crate::geometry::{Pose, Scan};
use crate::simulator::{Dataset, LidarModel, NoiseModel};

pub const MANIFEST_FORMAT_VERSION: u32 = 1;
pub const MANIFEST_NAME: &str = "manifest.txt";

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub format_version: u32,
    /// Relative to the manifest's directory.
    pub scans: String,
    pub poses: String,
    pub truth: Option<String>,
    pub units: String,
    pub lidar: LidarModel,
    pub environment: Option<String>,
    pub seed: Option<u64>,
    pub duration: Option<f64>,
    pub noise: Option<NoiseModel>,
}

impl DatasetManifest {
    pub fn new(lidar: LidarModel) -> Self {
        DatasetManifest {
            format_version: MANIFEST_FORMAT_VERSION,
            scans: "scans.txt".into(),
            poses: "poses.txt".into(),
            truth: None,
            units: "m rad s".into(),
            lidar,
            environment: None,
            seed: None,
            duration: None,
            noise: None,
        }
    }

    pub fn format(&self) -> String {
        let mut o = String::from("# dataset manifest\n");
        let _ = writeln!(o, "format_version = {}", self.format_version);
        let _ = writeln!(o, "scans = {}", self.scans);
        let _ = writeln!(o, "poses = {}", self.poses);
        if let Some(t) = &self.truth {
            let _ = writeln!(o, "truth = {t}");
        }
        let _ = writeln!(o, "units = {}", self.units);
        let l = &self.lidar;
        for (k, v) in [
            ("rate_hz", l.rate_hz),
            ("fov", l.fov),
            ("resolution", l.resolution),
            ("range_min", l.range_min),
            ("range_max", l.range_max),
            ("range_noise", l.range_noise),
        ] {
            let _ = writeln!(o, "lidar.{k} = {}", fmt_f64(v));
        }
        if let Some(e) = &self.environment {
            let _ = writeln!(o, "environment = {e}");
        }
        if let Some(s) = self.seed {
            let _ = writeln!(o, "seed = {s}");
        }
        if let Some(d) = self.duration {
            let _ = writeln!(o, "duration = {}", fmt_f64(d));
        }
        if let Some(n) = &self.noise {
            let _ = writeln!(o, "noise.trans_std = {}", fmt_f64(n.trans_std));
            let _ = writeln!(o, "noise.rot_std = {}", fmt_f64(n.rot_std));
            let _ = writeln!(o, "noise.range_std = {}", fmt_f64(n.range_std));
            let _ = writeln!(o, "noise.seed = {}", n.seed);
        }
        o
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self> {
        let mut m = DatasetManifest::new(LidarModel::default());
        let mut version = None;
        let (mut scans, mut poses) = (None, None);
        let mut noise = NoiseModel::none();
        let mut has_noise = false;
        for (line, k, v) in parse_key_values(path, text)? {
            let num = |what: &str| parse_f64(path, line, &v, what);
            let int = || v.parse::<u64>().map_err(|_| parse_error(path, line, format!("`{k}` must be an integer")));
            match k.as_str() {
                "format_version" => version = Some(int()?),
                "scans" => scans = Some(v.clone()),
                "poses" => poses = Some(v.clone()),
                "truth" => m.truth = Some(v.clone()),
                "units" => m.units = v.clone(),
                "lidar.rate_hz" => m.lidar.rate_hz = num(&k)?,
                "lidar.fov" => m.lidar.fov = num(&k)?,
                "lidar.resolution" => m.lidar.resolution = num(&k)?,
                "lidar.range_min" => m.lidar.range_min = num(&k)?,
                "lidar.range_max" => m.lidar.range_max = num(&k)?,
                "lidar.range_noise" => m.lidar.range_noise = num(&k)?,
                "environment" => m.environment = Some(v.clone()),
                "seed" => m.seed = Some(int()?),
                "duration" => m.duration = Some(num(&k)?),
                "noise.trans_std" => (noise.trans_std, has_noise) = (num(&k)?, true),
                "noise.rot_std" => (noise.rot_std, has_noise) = (num(&k)?, true),
                "noise.range_std" => (noise.range_std, has_noise) = (num(&k)?, true),
                "noise.seed" => (noise.seed, has_noise) = (int()?, true),
                _ => return Err(parse_error(path, line, format!("unknown manifest key `{k}`"))),
            }
        }
        match version {
            Some(v) if v == MANIFEST_FORMAT_VERSION as u64 => m.format_version = v as u32,
            Some(v) => return Err(parse_error(path, 0, format!("unsupported manifest format version {v}"))),
            None => return Err(parse_error(path, 0, "missing format_version")),
        }
        m.scans = scans.ok_or_else(|| parse_error(path, 0, "missing `scans`"))?;
        m.poses = poses.ok_or_else(|| parse_error(path, 0, "missing `poses`"))?;
        m.noise = has_noise.then_some(noise);
        m.lidar.validate()?;
        Ok(m)
    }
}

#[derive(Debug, Clone)]
pub struct Bundle {
    pub manifest: DatasetManifest,
    pub scans: Vec<Scan>,
    pub poses: Vec<Pose>,
    pub truth: Option<ParamsFile>,
}

/// Accepts either the bundle directory or the manifest file itself.
pub fn manifest_path(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join(MANIFEST_NAME)
    } else {
        path.to_path_buf()
    }
}

pub fn load_bundle(path: &Path) -> Result<Bundle> {
    let mpath = manifest_path(path);
    let manifest = DatasetManifest::parse(&mpath, &read_text(&mpath)?)?;
    let scans = read_scans(&sibling(&mpath, &manifest.scans))?;
    let poses = read_poses(&sibling(&mpath, &manifest.poses))?;
    let truth = manifest.truth.as_deref().map(|t| read_params(&sibling(&mpath, t))).transpose()?;
    Ok(Bundle { manifest, scans, poses, truth })
}

/// Writes a simulated dataset into `dir`; returns the manifest path.
pub fn write_bundle(dir: &Path, data: &Dataset, seed: Option<u64>) -> Result<PathBuf> {
    if dir.exists() && !dir.is_dir() {
        return Err(Error::InvalidInput(format!("{} exists and is not a directory", dir.display())));
    }
    let mut m = DatasetManifest::new(data.lidar);
    m.truth = Some("truth.txt".into());
    m.environment = Some(data.environment.clone());
    m.seed = seed;
    m.duration = Some(data.trajectory.duration);
    m.noise = Some(data.noise);
    write_scans(&dir.join(&m.scans), &data.scans)?;
    write_poses(&dir.join(&m.poses), &data.poses)?;
    write_params(&dir.join("truth.txt"), &data.truth, Some(data.time_offset))?;
    let path = dir.join(MANIFEST_NAME);
    write_text(&path, &m.format())?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trip() {
        let mut m = DatasetManifest::new(LidarModel::default());
        m.environment = Some("simple_room".into());
        m.seed = Some(7);
        m.noise = Some(NoiseModel::default());
        m.truth = Some("truth.txt".into());
        let back = DatasetManifest::parse(Path::new("m"), &m.format()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn manifest_rejects_unknown_version_and_keys() {
        let good = DatasetManifest::new(LidarModel::default()).format();
        let bad = good.replace("format_version = 1", "format_version = 9");
        assert!(DatasetManifest::parse(Path::new("m"), &bad).is_err());
        let typo = format!("{good}lidar.rate = 3\n");
        assert!(DatasetManifest::parse(Path::new("m"), &typo).is_err());
    }
}
