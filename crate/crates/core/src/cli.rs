//! Command-line front end.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::entropy::{CloudBuilder, CloudConfig};
use crate::error::{Error, Result};
use crate::geometry::{CalibParams, Pose, Scan};
use crate::io::bundle::{load_bundle, write_bundle, Bundle};
use crate::io::result::format_result;
use crate::io::{evaluate, export_ply, read_params, write_csv, write_result, ParamErrors, ParamsFile, RunConfig};
use crate::optimizer::{align_streams, calibrate_streams, calibrate_with_time, RotationInterp};
use crate::simulator::{build_environment, default_truth, make_dataset, LidarModel, NoiseModel, TrajectorySpec};

#[derive(Debug, Parser)]
#[command(name = "rqe-calib", version, about = "Lidar-to-egomotion Sim(3) calibration by entropy minimization")]
pub struct Cli {
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a dataset bundle with known ground truth.
    Simulate {
        #[arg(long)]
        env: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Seconds.
        #[arg(long, default_value_t = 50.0)]
        duration: f64,
        #[arg(long)]
        out: PathBuf,
        /// Lidar clock offset in milliseconds.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        td: f64,
        #[arg(long)]
        noiseless: bool,
    },
    /// Estimate the calibration of a bundle.
    Calibrate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cost along one parameter, all others fixed, as CSV.
    CostSlice {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum)]
        param: SliceParam,
        /// Offsets from the centre: m, deg, scale units or ms.
        #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
        range: Vec<f64>,
        #[arg(long, default_value_t = 41)]
        steps: usize,
        /// Centre of the slice; defaults to the bundle's ground truth.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the point cloud for given parameters as ASCII PLY.
    ExportCloud {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        params: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Absolute per-parameter errors of a result against ground truth.
    Evaluate {
        #[arg(long)]
        result: PathBuf,
        #[arg(long)]
        truth: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SliceParam {
    X,
    Y,
    Z,
    Phi,
    Theta,
    Psi,
    S,
    Td,
}

impl SliceParam {
    /// Offset in CLI units to search-space units, plus the parameter index.
    fn index_and_unit(self) -> Option<(usize, f64)> {
        let deg = 1f64.to_radians();
        match self {
            SliceParam::X => Some((0, 1.0)),
            SliceParam::Y => Some((1, 1.0)),
            SliceParam::Z => Some((2, 1.0)),
            SliceParam::Phi => Some((3, deg)),
            SliceParam::Theta => Some((4, deg)),
            SliceParam::Psi => Some((5, deg)),
            SliceParam::S => Some((6, 1.0)),
            SliceParam::Td => None,
        }
    }
}

pub fn run() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Simulate { env, seed, duration, out, td, noiseless } => simulate(&env, seed, duration, &out, td, noiseless),
        Command::Calibrate { data, config, out } => calibrate(&data, config.as_deref(), &out),
        Command::CostSlice { data, param, range, steps, params, config, out } => {
            cost_slice(&data, param, (range[0], range[1]), steps, params.as_deref(), config.as_deref(), out.as_deref())
        }
        Command::ExportCloud { data, params, config, out } => export_cloud(&data, &params, config.as_deref(), &out),
        Command::Evaluate { result, truth } => {
            let e = evaluate(&read_params(&result)?, &read_params(&truth)?);
            println!("{}", ParamErrors::HEADER);
            println!("{}", e.row());
            Ok(())
        }
    }
}

fn simulate(env: &str, seed: u64, duration: f64, out: &Path, td_ms: f64, noiseless: bool) -> Result<()> {
    let environment = build_environment(env)?;
    let spec = TrajectorySpec::randomized(&environment, duration, seed);
    let noise = if noiseless { NoiseModel::none() } else { NoiseModel { seed, ..NoiseModel::default() } };
    let data = make_dataset(&environment, &spec, &LidarModel::default(), &noise, &default_truth(), td_ms * 1e-3)?;
    let manifest = write_bundle(out, &data, Some(seed))?;
    let points: usize = data.scans.iter().map(|s| s.returns.iter().filter(|r| r.valid).count()).sum();
    println!("wrote {} ({} scans, {points} valid returns)", manifest.display(), data.scans.len());
    Ok(())
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::read(p),
        None => Ok(RunConfig::default()),
    }
}

fn calibrate(data: &Path, config: Option<&Path>, out: &Path) -> Result<()> {
    let cfg = load_config(config)?;
    let b = load_bundle(data)?;
    let space = cfg.space();
    let mut result = if cfg.estimate_time_offset {
        calibrate_with_time(&b.scans, &b.poses, &space, &cfg.optimizer, &cfg.time, &cfg.cloud)?
    } else {
        calibrate_streams(&b.scans, &b.poses, &space, &cfg.optimizer, &cfg.cloud)?
    };
    result.config = cfg.to_pairs();
    let json = write_result(out, &result)?;
    print!("{}", format_result(&result));
    println!("# wrote {} and {}", out.display(), json.display());
    Ok(())
}

/// Slice centre: explicit parameter file, else the bundle's ground truth.
fn centre(b: &Bundle, params: Option<&Path>) -> Result<ParamsFile> {
    match params {
        Some(p) => read_params(p),
        None => b.truth.ok_or_else(|| {
            Error::InvalidInput("bundle has no ground truth; pass --params".into())
        }),
    }
}

/// Scans that stay inside the trajectory for every offset in `[lo, hi]`.
fn stable_scans(scans: &[Scan], poses: &[Pose], lo: f64, hi: f64) -> Vec<Scan> {
    let (Some(first), Some(last)) = (poses.first(), poses.last()) else {
        return Vec::new();
    };
    scans.iter().filter(|s| s.t - hi >= first.t && s.t - lo <= last.t).cloned().collect()
}

fn cost_slice(
    data: &Path,
    param: SliceParam,
    (a, b): (f64, f64),
    steps: usize,
    params: Option<&Path>,
    config: Option<&Path>,
    out: Option<&Path>,
) -> Result<()> {
    if steps < 2 || !(a < b) {
        return Err(Error::InvalidInput(format!("need A < B and at least 2 steps, got [{a}, {b}] with {steps}")));
    }
    let cfg = load_config(config)?;
    let bundle = load_bundle(data)?;
    let c = centre(&bundle, params)?;
    let td0 = c.time_offset.unwrap_or(0.0);
    let interp = cfg.time.rotation_interp;
    let offsets: Vec<f64> = (0..steps).map(|k| a + (b - a) * k as f64 / (steps - 1) as f64).collect();
    let mut rows = Vec::with_capacity(steps);
    match param.index_and_unit() {
        Some((i, unit)) => {
            let (s, p) = align_streams(&bundle.scans, &bundle.poses, td0, interp)?;
            let builder = CloudBuilder::new(&s, &p, &cfg.cloud, &c.params)?;
            for &o in &offsets {
                let value = c.params.get(i) + o * unit;
                let cost = builder.cost(&c.params.with(i, value), &cfg.cloud)?;
                rows.push(vec![o, value, cost]);
            }
        }
        None => {
            let (lo, hi) = (td0 + a * 1e-3, td0 + b * 1e-3);
            let scans = stable_scans(&bundle.scans, &bundle.poses, lo, hi);
            for &o in &offsets {
                let td = td0 + o * 1e-3;
                rows.push(vec![o, td, td_cost(&scans, &bundle.poses, td, &c.params, &cfg.cloud, interp)?]);
            }
        }
    }
    match out {
        Some(path) => write_csv(path, &["offset", "value", "cost"], &rows),
        None => {
            print!("{}", crate::io::format_csv(&["offset", "value", "cost"], &rows));
            Ok(())
        }
    }
}

fn td_cost(scans: &[Scan], poses: &[Pose], td: f64, params: &CalibParams, cloud: &CloudConfig, interp: RotationInterp) -> Result<f64> {
    let (s, p) = align_streams(scans, poses, td, interp)?;
    CloudBuilder::new(&s, &p, cloud, params)?.cost(params, cloud)
}

fn export_cloud(data: &Path, params: &Path, config: Option<&Path>, out: &Path) -> Result<()> {
    let cfg = load_config(config)?;
    let b = load_bundle(data)?;
    let p = read_params(params)?;
    let (s, poses) = align_streams(&b.scans, &b.poses, p.time_offset.unwrap_or(0.0), cfg.time.rotation_interp)?;
    let cloud = CloudBuilder::new(&s, &poses, &cfg.cloud, &p.params)?.build(&p.params)?;
    export_ply(&cloud, out)?;
    println!("wrote {} ({} points)", out.display(), cloud.len());
    Ok(())
}
