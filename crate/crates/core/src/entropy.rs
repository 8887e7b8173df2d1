//! Gaussian-mixture point clouds and their Renyi quadratic entropy cost.
//!
//! Every lifted lidar return becomes one mixture component with covariance
//! `Sigma_i + sigma^2 I`. Up to the monotone `-log` and the `1/M^2` factor the
//! entropy reduces to the pair sum
//!
//! ```text
//! cost = - sum_{i} sum_{j >= i} N(x_i - x_j; Sigma_i + Sigma_j + 2 sigma^2 I)
//! ```
//!
//! Lower cost means a crisper cloud. Pairs farther apart than the pruning
//! bound are skipped; candidate neighbours come from a k-d tree that is rebuilt
//! for every cloud.

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::{Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{calib_to_transform, max_eigenvalue, CalibParams, Pose, Scan, ScanLifter, WorldPoint};
use crate::kdtree::KdTree;
use crate::par::map_indices;

/// How the pruning distance is formed from `lambda = max(lambda_1(Sigma_i), lambda_1(Sigma_j))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PruneBound {
    /// `2k * sqrt(lambda + sigma^2)`: `k` counts kernel standard deviations.
    #[default]
    StdDev,
    /// `2k * (lambda + sigma^2)`, variance units taken as a length.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CostMode {
    Exact,
    Pruned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloudConfig {
    /// Isotropic kernel standard deviation (m).
    pub sigma_kernel: f64,
    pub k_prune: f64,
    pub prune_bound: PruneBound,
    /// Keep every n-th return of the whole stream, counted across scans, so
    /// the kept beams shift from scan to scan unless the beam count is a
    /// multiple of the stride.
    pub subsample_stride: usize,
    pub max_points: usize,
    pub range_min: f64,
    pub range_max: f64,
    /// Compute point covariances once at the reference parameters instead of
    /// for every candidate.
    pub freeze_covariance: bool,
}

impl Default for CloudConfig {
    fn default() -> Self {
        Self {
            sigma_kernel: 0.05,
            k_prune: 3.0,
            prune_bound: PruneBound::StdDev,
            subsample_stride: 1,
            max_points: 5_000_000,
            range_min: 0.1,
            range_max: 30.0,
            freeze_covariance: false,
        }
    }
}

impl CloudConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_kernel > 0.0) || !self.sigma_kernel.is_finite() {
            return Err(Error::Config(format!("sigma_kernel must be positive, got {}", self.sigma_kernel)));
        }
        if !(self.k_prune >= 1.0) {
            return Err(Error::Config(format!("k_prune must be >= 1, got {}", self.k_prune)));
        }
        if self.subsample_stride < 1 || self.max_points < 1 {
            return Err(Error::Config("subsample_stride and max_points must be >= 1".into()));
        }
        if !(self.range_min >= 0.0 && self.range_max > self.range_min) {
            return Err(Error::Config(format!("bad range limits [{}, {}]", self.range_min, self.range_max)));
        }
        Ok(())
    }

    /// Per-point pruning radius for a component with largest covariance eigenvalue `lambda`.
    pub fn prune_radius(&self, lambda: f64) -> f64 {
        let v = lambda + self.sigma_kernel * self.sigma_kernel;
        match self.prune_bound {
            PruneBound::StdDev => 2.0 * self.k_prune * v.sqrt(),
            PruneBound::Literal => 2.0 * self.k_prune * v,
        }
    }
}

/// The mixture: lifted points, their largest covariance eigenvalues and a spatial index.
#[derive(Debug, Clone)]
pub struct GmmCloud {
    pub points: Vec<WorldPoint>,
    pub lambda_max: Vec<f64>,
    index: KdTree,
}

impl GmmCloud {
    pub fn from_points(points: Vec<WorldPoint>) -> Self {
        let lambda_max = points.iter().map(|p| max_eigenvalue(&p.cov).max(0.0)).collect();
        let positions: Vec<Vector3<f64>> = points.iter().map(|p| p.position).collect();
        let index = KdTree::build(&positions);
        GmmCloud { points, lambda_max, index }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn index(&self) -> &KdTree {
        &self.index
    }

    pub fn positions(&self) -> impl Iterator<Item = &Vector3<f64>> {
        self.points.iter().map(|p| &p.position)
    }
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `N(d; S)` for a 3-D zero-mean Gaussian with symmetric positive-definite `S`,
/// using the adjugate for the inverse.
#[inline]
fn gaussian3(d: &Vector3<f64>, s: &Matrix3<f64>) -> f64 {
    let (a, b, c) = (s[(0, 0)], s[(0, 1)], s[(0, 2)]);
    let (e, f) = (s[(1, 1)], s[(1, 2)]);
    let g = s[(2, 2)];
    let c00 = e * g - f * f;
    let c01 = c * f - b * g;
    let c02 = b * f - c * e;
    let c11 = a * g - c * c;
    let c12 = b * c - a * f;
    let c22 = a * e - b * b;
    let det = a * c00 + b * c01 + c * c02;
    let (x, y, z) = (d.x, d.y, d.z);
    let quad = (c00 * x * x + c11 * y * y + c22 * z * z + 2.0 * (c01 * x * y + c02 * x * z + c12 * y * z)) / det;
    (-0.5 * quad).exp() / ((2.0 * PI).powi(3) * det).sqrt()
}

struct Slot {
    pos: Vector3<f64>,
    /// Upper triangle, row-major.
    cov: [f64; 6],
    radius: f64,
    zero: bool,
}

/// [`gaussian3`] for a packed upper-triangle `s` with `two_s2` added to the diagonal.
#[inline]
fn packed_gaussian(d: &Vector3<f64>, s: &[f64; 6], two_s2: f64, norm: f64) -> f64 {
    let [a, b, c, e, f, g] = *s;
    let (a, e, g) = (a + two_s2, e + two_s2, g + two_s2);
    let c00 = e * g - f * f;
    let c01 = c * f - b * g;
    let c02 = b * f - c * e;
    let c11 = a * g - c * c;
    let c12 = b * c - a * f;
    let c22 = a * e - b * b;
    let det = a * c00 + b * c01 + c * c02;
    let (x, y, z) = (d.x, d.y, d.z);
    let quad = (c00 * x * x + c11 * y * y + c22 * z * z + 2.0 * (c01 * x * y + c02 * x * z + c12 * y * z)) / det;
    (-0.5 * quad).exp() / (norm * det).sqrt()
}

/// One pairwise entropy contribution `N(x_i - x_j; Sigma_i + Sigma_j + 2 sigma^2 I)`.
pub fn pairwise_term(p_i: &WorldPoint, p_j: &WorldPoint, sigma: f64) -> Result<f64> {
    let v = pair_value(&p_i.position, &p_i.cov, &p_j.position, &p_j.cov, sigma * sigma);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Computation("pairwise term"))
    }
}

#[inline]
fn pair_value(xi: &Vector3<f64>, si: &Matrix3<f64>, xj: &Vector3<f64>, sj: &Matrix3<f64>, sigma2: f64) -> f64 {
    let s = si + sj + Matrix3::from_diagonal_element(2.0 * sigma2);
    gaussian3(&(xi - xj), &s)
}

/// Per-evaluation counters.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CostStats {
    pub pairs_visited: u64,
}

struct PairKernel<'a> {
    cloud: &'a GmmCloud,
    sigma2: f64,
    /// Pairs with both covariances zero reduce to `iso_norm * exp(-d^2 * iso_scale)`.
    iso_norm: f64,
    iso_scale: f64,
    zero_cov: Vec<bool>,
}

impl<'a> PairKernel<'a> {
    fn new(cloud: &'a GmmCloud, sigma: f64) -> Self {
        let sigma2 = sigma * sigma;
        PairKernel {
            cloud,
            sigma2,
            iso_norm: (4.0 * PI * sigma2).powf(-1.5),
            iso_scale: 1.0 / (4.0 * sigma2),
            zero_cov: cloud.points.iter().map(|p| p.cov.iter().all(|&v| v == 0.0)).collect(),
        }
    }

    #[inline]
    fn eval(&self, i: usize, j: usize, d2: f64) -> f64 {
        if self.zero_cov[i] && self.zero_cov[j] {
            self.iso_norm * (-d2 * self.iso_scale).exp()
        } else {
            let (a, b) = (&self.cloud.points[i], &self.cloud.points[j]);
            pair_value(&a.position, &a.cov, &b.position, &b.cov, self.sigma2)
        }
    }
}

/// Negated pair sum. `Exact` visits all `M(M+1)/2` pairs in a fixed order;
/// `Pruned` drops pairs at or beyond the pruning distance.
pub fn rqe_cost(cloud: &GmmCloud, cfg: &CloudConfig, mode: CostMode) -> Result<f64> {
    rqe_cost_with_stats(cloud, cfg, mode).map(|(c, _)| c)
}

pub fn rqe_cost_with_stats(cloud: &GmmCloud, cfg: &CloudConfig, mode: CostMode) -> Result<(f64, CostStats)> {
    if cloud.is_empty() {
        return Err(Error::EmptyCloud);
    }
    let kernel = PairKernel::new(cloud, cfg.sigma_kernel);
    let (sum, stats) = match mode {
        CostMode::Exact => exact_sum(&kernel),
        CostMode::Pruned => pruned_sum(&kernel, cfg),
    };
    let cost = -sum;
    if cost.is_finite() {
        Ok((cost, stats))
    } else {
        Err(Error::Computation("entropy cost"))
    }
}

fn exact_row(kernel: &PairKernel, i: usize) -> CompensatedSum {
    let pts = &kernel.cloud.points;
    let mut acc = CompensatedSum::default();
    for j in i..pts.len() {
        let d2 = (pts[i].position - pts[j].position).norm_squared();
        acc.add(kernel.eval(i, j, d2));
    }
    acc
}

fn exact_sum(kernel: &PairKernel) -> (f64, CostStats) {
    let m = kernel.cloud.len();
    let rows: Vec<CompensatedSum> = map_indices(m, |i| exact_row(kernel, i));
    let mut total = CompensatedSum::default();
    rows.iter().for_each(|r| total.merge(r));
    let pairs = (m as u64) * (m as u64 + 1) / 2;
    (total.value(), CostStats { pairs_visited: pairs })
}

fn pruned_sum(kernel: &PairKernel, cfg: &CloudConfig) -> (f64, CostStats) {
    let cloud = kernel.cloud;
    let order = cloud.index.order();
    // Everything the inner loop touches, laid out in leaf order so that
    // neighbours are close in memory.
    let slots: Vec<Slot> = order
        .iter()
        .map(|&i| {
            let p = &cloud.points[i];
            let c = &p.cov;
            Slot {
                pos: p.position,
                cov: [c[(0, 0)], c[(0, 1)], c[(0, 2)], c[(1, 1)], c[(1, 2)], c[(2, 2)]],
                radius: cfg.prune_radius(cloud.lambda_max[i]),
                zero: kernel.zero_cov[i],
            }
        })
        .collect();
    let two_s2 = 2.0 * kernel.sigma2;
    let norm = (2.0 * PI).powi(3);
    // A pair is kept when its distance is below max(r_i, r_j). Each point
    // looks only within its own radius, and the pair is credited to the
    // endpoint with the larger radius (lower slot on ties), so it is summed
    // exactly once. Neighbour candidates are gathered once per leaf.
    let tree = &cloud.index;
    let leaves = tree.leaves();
    let pts = tree.slot_points();
    let rows: Vec<(CompensatedSum, u64)> = map_indices(leaves.len(), |l| {
        let range = leaves[l].clone();
        let mut lo = Vector3::repeat(f64::INFINITY);
        let mut hi = Vector3::repeat(f64::NEG_INFINITY);
        let mut rmax: f64 = 0.0;
        for k in range.clone() {
            lo = lo.inf(&pts[k]);
            hi = hi.sup(&pts[k]);
            rmax = rmax.max(slots[k].radius);
        }
        let mut cand = Vec::with_capacity(1024);
        tree.slots_near_box(&lo, &hi, rmax, &mut cand);
        let mut acc = CompensatedSum::default();
        let mut visited = 0u64;
        for k in range {
            let a = &slots[k];
            acc.add(kernel.eval(order[k], order[k], 0.0));
            visited += 1;
            let r2 = a.radius * a.radius;
            for &m in &cand {
                let b = &slots[m];
                if !(a.radius > b.radius || (a.radius == b.radius && k < m)) {
                    continue;
                }
                let d = a.pos - b.pos;
                let d2 = d.norm_squared();
                if d2 >= r2 {
                    continue;
                }
                let v = if a.zero && b.zero {
                    kernel.iso_norm * (-d2 * kernel.iso_scale).exp()
                } else {
                    let s = std::array::from_fn(|q| a.cov[q] + b.cov[q]);
                    packed_gaussian(&d, &s, two_s2, norm)
                };
                acc.add(v);
                visited += 1;
            }
        }
        (acc, visited)
    });
    let mut total = CompensatedSum::default();
    let mut visited = 0u64;
    for (r, v) in &rows {
        total.merge(r);
        visited += v;
    }
    (total.value(), CostStats { pairs_visited: visited })
}

/// Diagnostics for one cost evaluation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyReport {
    pub num_points: usize,
    pub pairs_visited: u64,
    /// Fraction of the `M(M+1)/2` pairs that were skipped.
    pub prune_ratio: f64,
    /// `None` when the cost is undefined (empty cloud).
    pub cost: Option<f64>,
    pub wall_time_s: f64,
}

pub fn entropy_report(cloud: &GmmCloud, cfg: &CloudConfig) -> EntropyReport {
    let start = Instant::now();
    let m = cloud.len();
    match rqe_cost_with_stats(cloud, cfg, CostMode::Pruned) {
        Ok((cost, stats)) => {
            let total = (m as f64) * (m as f64 + 1.0) / 2.0;
            EntropyReport {
                num_points: m,
                pairs_visited: stats.pairs_visited,
                prune_ratio: 1.0 - stats.pairs_visited as f64 / total,
                cost: Some(cost),
                wall_time_s: start.elapsed().as_secs_f64(),
            }
        }
        Err(_) => EntropyReport {
            num_points: m,
            pairs_visited: 0,
            prune_ratio: 0.0,
            cost: None,
            wall_time_s: start.elapsed().as_secs_f64(),
        },
    }
}

struct ScanEntry {
    scan_index: usize,
    pose: Pose,
    /// (return index, point)
    returns: Vec<(usize, Vector2<f64>)>,
    frozen_cov: Option<Vec<Matrix3<f64>>>,
}

/// Pre-filtered scan/pose data from which clouds are lifted repeatedly for
/// different candidate parameters.
pub struct CloudBuilder {
    entries: Vec<ScanEntry>,
    num_points: usize,
}

impl CloudBuilder {
    /// Pairs scans with poses (timestamps must match exactly, index by index),
    /// drops invalid and out-of-range returns and applies the stride and
    /// point cap. `reference` is used for frozen covariances.
    pub fn new(scans: &[Scan], poses: &[Pose], cfg: &CloudConfig, reference: &CalibParams) -> Result<Self> {
        cfg.validate()?;
        for (i, scan) in scans.iter().enumerate() {
            match poses.get(i) {
                Some(p) if p.t == scan.t => {}
                Some(p) => return Err(Error::Alignment { index: i, scan_t: scan.t, pose_t: p.t }),
                None => return Err(Error::Alignment { index: i, scan_t: scan.t, pose_t: f64::NAN }),
            }
        }
        if poses.len() > scans.len() {
            let i = scans.len();
            return Err(Error::Alignment { index: i, scan_t: f64::NAN, pose_t: poses[i].t });
        }
        let mut entries: Vec<ScanEntry> = Vec::with_capacity(scans.len());
        let mut stream_offset = 0;
        for (si, (scan, pose)) in scans.iter().zip(poses).enumerate() {
            pose.validate()?;
            let first = stream_offset;
            stream_offset += scan.returns.len();
            let returns: Vec<(usize, Vector2<f64>)> = scan
                .returns
                .iter()
                .enumerate()
                .filter(|(ri, r)| {
                    let range = r.range();
                    (first + ri) % cfg.subsample_stride == 0
                        && r.valid
                        && range.is_finite()
                        && range >= cfg.range_min
                        && range <= cfg.range_max
                })
                .map(|(ri, r)| (ri, r.point))
                .collect();
            if !returns.is_empty() {
                entries.push(ScanEntry { scan_index: si, pose: pose.clone(), returns, frozen_cov: None });
            }
        }
        let mut num_points: usize = entries.iter().map(|e| e.returns.len()).sum();
        if num_points > cfg.max_points {
            // evenly spaced decimation over the whole stream
            let keep: Vec<bool> = {
                let mut keep = vec![false; num_points];
                for k in 0..cfg.max_points {
                    keep[k * num_points / cfg.max_points] = true;
                }
                keep
            };
            let mut g = 0;
            for e in entries.iter_mut() {
                e.returns.retain(|_| {
                    let k = keep[g];
                    g += 1;
                    k
                });
            }
            entries.retain(|e| !e.returns.is_empty());
            num_points = cfg.max_points;
        }
        if num_points == 0 {
            log::warn!("no valid lidar returns survived filtering; cloud is empty");
        }
        let mut builder = CloudBuilder { entries, num_points };
        if cfg.freeze_covariance {
            reference.validate()?;
            let calib = calib_to_transform(reference)?;
            for e in builder.entries.iter_mut() {
                let lifter = ScanLifter::new(&e.pose, &calib, reference.scale);
                e.frozen_cov = Some(e.returns.iter().map(|(_, p)| lifter.covariance(p)).collect());
            }
        }
        Ok(builder)
    }

    pub fn num_points(&self) -> usize {
        self.num_points
    }

    pub fn num_scans(&self) -> usize {
        self.entries.len()
    }

    /// Lifts every retained return with `params` and indexes the result.
    pub fn build(&self, params: &CalibParams) -> Result<GmmCloud> {
        params.validate()?;
        let calib = calib_to_transform(params)?;
        let per_scan: Vec<Vec<WorldPoint>> = map_indices(self.entries.len(), |k| {
            let e = &self.entries[k];
            let lifter = ScanLifter::new(&e.pose, &calib, params.scale);
            e.returns
                .iter()
                .enumerate()
                .map(|(n, (ri, p))| WorldPoint {
                    position: lifter.position(p),
                    cov: match &e.frozen_cov {
                        Some(c) => c[n],
                        None => lifter.covariance(p),
                    },
                    t: e.pose.t,
                    source: (e.scan_index, *ri),
                })
                .collect()
        });
        let mut points = Vec::with_capacity(self.num_points);
        per_scan.into_iter().for_each(|v| points.extend(v));
        Ok(GmmCloud::from_points(points))
    }

    /// Builds the cloud for `params` and returns its pruned cost.
    pub fn cost(&self, params: &CalibParams, cfg: &CloudConfig) -> Result<f64> {
        let cloud = self.build(params)?;
        rqe_cost(&cloud, cfg, CostMode::Pruned)
    }
}

/// Lifts `scans` (index-aligned with `poses`) into an indexed Gaussian mixture.
pub fn build_cloud(scans: &[Scan], poses: &[Pose], params: &CalibParams, cfg: &CloudConfig) -> Result<GmmCloud> {
    CloudBuilder::new(scans, poses, cfg, params)?.build(params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::LidarReturn;

    fn scan(t: f64, pts: &[(f64, f64)]) -> Scan {
        Scan {
            t,
            returns: pts
                .iter()
                .enumerate()
                .map(|(i, &(x, y))| LidarReturn { beam: i as u32, point: Vector2::new(x, y), valid: true })
                .collect(),
        }
    }

    fn pose(t: f64) -> Pose {
        Pose::new(t, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    }

    #[test]
    fn single_point_cloud() {
        let cfg = CloudConfig::default();
        let c = build_cloud(&[scan(0.0, &[(1.0, 2.0)])], &[pose(0.0)], &CalibParams::identity(), &cfg).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.points[0].position, Vector3::new(1.0, 2.0, 0.0));
        let s2 = cfg.sigma_kernel.powi(2);
        let want = -(4.0 * PI * s2).powf(-1.5);
        let got = rqe_cost(&c, &cfg, CostMode::Exact).unwrap();
        assert!(((got - want) / want).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_returns_are_dropped() {
        let cfg = CloudConfig::default();
        let s = scan(0.0, &[(100.0, 0.0), (0.01, 0.0)]);
        let c = build_cloud(&[s], &[pose(0.0)], &CalibParams::identity(), &cfg).unwrap();
        assert!(c.is_empty());
        assert!(matches!(rqe_cost(&c, &cfg, CostMode::Pruned), Err(Error::EmptyCloud)));
        let r = entropy_report(&c, &cfg);
        assert_eq!(r.num_points, 0);
        assert!(r.cost.is_none());
    }

    #[test]
    fn stride_counts() {
        let pts = [(1.0, 0.0), (2.0, 0.0), (3.0, 0.0)];
        let scans = [scan(0.0, &pts), scan(0.1, &pts)];
        let poses = [pose(0.0), pose(0.1)];
        let mut cfg = CloudConfig::default();
        assert_eq!(build_cloud(&scans, &poses, &CalibParams::identity(), &cfg).unwrap().len(), 6);
        cfg.subsample_stride = 3;
        assert_eq!(build_cloud(&scans, &poses, &CalibParams::identity(), &cfg).unwrap().len(), 2);
        // counted across scans: stream indices 0, 2, 4 -> returns 0 and 2 of the
        // first scan, return 1 of the second
        cfg.subsample_stride = 2;
        let cloud = build_cloud(&scans, &poses, &CalibParams::identity(), &cfg).unwrap();
        let sources: Vec<_> = cloud.points.iter().map(|p| p.source).collect();
        assert_eq!(sources, [(0, 0), (0, 2), (1, 1)]);
        cfg.subsample_stride = 1;
        cfg.max_points = 4;
        assert_eq!(build_cloud(&scans, &poses, &CalibParams::identity(), &cfg).unwrap().len(), 4);
    }

    #[test]
    fn misaligned_timestamps_name_the_index() {
        let scans = [scan(0.0, &[(1.0, 0.0)]), scan(0.2, &[(1.0, 0.0)])];
        let poses = [pose(0.0), pose(0.1)];
        match build_cloud(&scans, &poses, &CalibParams::identity(), &CloudConfig::default()) {
            Err(Error::Alignment { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected alignment error, got {other:?}"),
        }
    }

    #[test]
    fn gaussian_tail_is_monotone() {
        let a = WorldPoint { position: Vector3::zeros(), cov: Matrix3::zeros(), t: 0.0, source: (0, 0) };
        let mut prev = f64::INFINITY;
        for k in 0..40 {
            let b = WorldPoint { position: Vector3::new(0.05 * k as f64, 0.0, 0.0), ..a };
            let v = pairwise_term(&a, &b, 0.05).unwrap();
            assert!(v <= prev);
            prev = v;
        }
        assert!(prev < 1e-30);
    }

    #[test]
    fn compensated_sum_is_accurate() {
        let mut acc = CompensatedSum::default();
        acc.add(1.0);
        for _ in 0..1000 {
            acc.add(1e-17);
        }
        assert_eq!(acc.value(), 1.0 + 1e-14);
    }

    #[test]
    fn config_validation() {
        let mut c = CloudConfig::default();
        assert!(c.validate().is_ok());
        c.k_prune = 0.5;
        assert!(c.validate().is_err());
        c = CloudConfig { sigma_kernel: 0.0, ..CloudConfig::default() };
        assert!(c.validate().is_err());
    }
}
