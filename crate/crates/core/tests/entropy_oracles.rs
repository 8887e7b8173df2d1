//! Entropy cost against dense oracles: explicit inverse/determinant Gaussians,
//! an all-pairs double loop, and invariance under rigid motion.

use nalgebra::{Matrix3, Rotation3, Vector3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rqe_calib::entropy::{pairwise_term, rqe_cost, CloudConfig, CostMode, GmmCloud};
use rqe_calib::geometry::WorldPoint;

const PI: f64 = std::f64::consts::PI;

fn spd(rng: &mut ChaCha8Rng, scale: f64) -> Matrix3<f64> {
    let a = Matrix3::from_fn(|_, _| rng.random_range(-1.0..1.0));
    (a * a.transpose()) * scale
}

fn point(rng: &mut ChaCha8Rng, extent: f64, cov_scale: f64) -> WorldPoint {
    WorldPoint {
        position: Vector3::from_fn(|_, _| rng.random_range(-extent..extent)),
        cov: if cov_scale > 0.0 { spd(rng, cov_scale) } else { Matrix3::zeros() },
        t: 0.0,
        source: (0, 0),
    }
}

/// Normal density through an explicit inverse and determinant.
fn dense_gaussian(d: &Vector3<f64>, s: &Matrix3<f64>) -> f64 {
    let inv = s.try_inverse().expect("invertible");
    let q = (d.transpose() * inv * d)[(0, 0)];
    (-0.5 * q).exp() / ((2.0 * PI).powi(3) * s.determinant()).sqrt()
}

fn dense_pair(a: &WorldPoint, b: &WorldPoint, sigma: f64) -> f64 {
    dense_gaussian(&(a.position - b.position), &(a.cov + b.cov + Matrix3::identity() * 2.0 * sigma * sigma))
}

fn dense_cost(points: &[WorldPoint], sigma: f64) -> f64 {
    let mut sum = 0.0;
    for i in 0..points.len() {
        for j in i..points.len() {
            sum += dense_pair(&points[i], &points[j], sigma);
        }
    }
    -sum
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn single_point_cost() {
    for sigma in [0.01, 0.05, 0.3] {
        let cloud = GmmCloud::from_points(vec![WorldPoint {
            position: Vector3::new(1.0, -2.0, 0.5),
            cov: Matrix3::zeros(),
            t: 0.0,
            source: (0, 0),
        }]);
        let cfg = CloudConfig { sigma_kernel: sigma, ..Default::default() };
        let expected = -(4.0 * PI * sigma * sigma).powf(-1.5);
        for mode in [CostMode::Exact, CostMode::Pruned] {
            let c = rqe_cost(&cloud, &cfg, mode).unwrap();
            assert!(rel(c, expected) < 1e-12, "{c} vs {expected}");
        }
    }
}

#[test]
fn pairwise_term_matches_dense_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..500 {
        let a = point(&mut rng, 0.3, 0.01);
        let b = point(&mut rng, 0.3, 0.01);
        let sigma = rng.random_range(0.01..0.2);
        let v = pairwise_term(&a, &b, sigma).unwrap();
        let o = dense_pair(&a, &b, sigma);
        assert!(rel(v, o) < 1e-12, "{v} vs {o}");
    }
}

#[test]
fn exact_cost_matches_double_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let points: Vec<WorldPoint> = (0..300).map(|_| point(&mut rng, 1.0, 0.002)).collect();
    let cfg = CloudConfig { sigma_kernel: 0.05, ..Default::default() };
    let c = rqe_cost(&GmmCloud::from_points(points.clone()), &cfg, CostMode::Exact).unwrap();
    assert!(rel(c, dense_cost(&points, 0.05)) < 1e-12);
}

#[test]
fn pruning_converges_to_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for trial in 0..20 {
        let cov = if trial % 2 == 0 { 0.0 } else { 0.001 };
        let points: Vec<WorldPoint> = (0..500).map(|_| point(&mut rng, 1.0, cov)).collect();
        let cloud = GmmCloud::from_points(points);
        let exact = rqe_cost(&cloud, &CloudConfig::default(), CostMode::Exact).unwrap();
        let k3 = rqe_cost(&cloud, &CloudConfig { k_prune: 3.0, ..Default::default() }, CostMode::Pruned).unwrap();
        let k10 = rqe_cost(&cloud, &CloudConfig { k_prune: 10.0, ..Default::default() }, CostMode::Pruned).unwrap();
        assert!(rel(k3, exact) < 1e-3, "trial {trial}: k=3 {k3} vs {exact}");
        assert!(rel(k10, exact) < 1e-9, "trial {trial}: k=10 {k10} vs {exact}");
    }
}

fn rigid(points: &[WorldPoint], r: &Rotation3<f64>, t: &Vector3<f64>) -> Vec<WorldPoint> {
    points
        .iter()
        .map(|p| WorldPoint {
            position: r * p.position + t,
            cov: r.matrix() * p.cov * r.matrix().transpose(),
            ..*p
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rigid_motion_leaves_cost_unchanged(
        seed in any::<u64>(),
        axis in prop::array::uniform3(-1.0f64..1.0),
        angle in -PI..PI,
        shift in prop::array::uniform3(-50.0f64..50.0),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points: Vec<WorldPoint> = (0..400).map(|_| point(&mut rng, 1.0, 0.001)).collect();
        let axis = Vector3::from(axis);
        prop_assume!(axis.norm() > 1e-3);
        let r = Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(axis), angle);
        let moved = rigid(&points, &r, &Vector3::from(shift));
        let cfg = CloudConfig::default();
        for mode in [CostMode::Exact, CostMode::Pruned] {
            let a = rqe_cost(&GmmCloud::from_points(points.clone()), &cfg, mode).unwrap();
            let b = rqe_cost(&GmmCloud::from_points(moved.clone()), &cfg, mode).unwrap();
            prop_assert!(rel(b, a) < 1e-9, "{:?}: {} vs {}", mode, b, a);
        }
    }

    #[test]
    fn cost_is_negative_and_permutation_invariant(seed in any::<u64>(), n in 1usize..120) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points: Vec<WorldPoint> = (0..n).map(|_| point(&mut rng, 0.5, 0.0)).collect();
        let mut reversed = points.clone();
        reversed.reverse();
        let cfg = CloudConfig::default();
        let a = rqe_cost(&GmmCloud::from_points(points), &cfg, CostMode::Pruned).unwrap();
        let b = rqe_cost(&GmmCloud::from_points(reversed), &cfg, CostMode::Pruned).unwrap();
        prop_assert!(a < 0.0);
        prop_assert!(rel(b, a) < 1e-12);
    }
}
