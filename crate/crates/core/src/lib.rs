//! Extrinsic calibration of a 2-D lidar against an egomotion sensor by
//! minimizing the Renyi quadratic entropy of the reconstructed point cloud.
//!
//! The estimated quantity is a similarity transform: the lidar-to-base rigid
//! transform plus the (unknown) scale of the base trajectory, as produced by
//! monocular SLAM. A time offset between the two streams can be estimated
//! first by a one-dimensional entropy scan.
//!
//! Modules:
//! - [`geometry`]: Euler conventions, transforms, the inverse sensor model and covariance propagation.
//! - [`entropy`]: Gaussian-mixture clouds and the pruned pairwise entropy cost.
//! - [`optimizer`]: controlled random search, Nelder-Mead, time alignment and the calibration pipeline.
//! - [`simulator`]: synthetic environments, trajectories, raycast scans and noise.
//! - [`io`]: text file formats, PLY export and plot data.

#[cfg(feature = "cli")]
pub mod cli;
pub mod entropy;
pub mod error;
pub mod geometry;
pub mod io;
pub mod kdtree;
pub mod optimizer;
mod par;
pub mod simulator;

pub use error::{Error, Result};
