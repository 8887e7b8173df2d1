//! Ray intersections against surface points chosen in closed form: each ray is
//! aimed at a known point of the primitive, so the expected range is simply
//! the distance to that point.

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rqe_calib::simulator::{build_environment, raycast_scan, LidarModel, Primitive};
use rqe_calib::geometry::Transform;

const PI: f64 = std::f64::consts::PI;
const RAYS: usize = 1000;

fn unit(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Origin on the outer side of the tangent plane at `q` (normal `n`).
fn outside_origin(rng: &mut ChaCha8Rng, q: &Vector3<f64>, n: &Vector3<f64>) -> Vector3<f64> {
    let mut d = unit(rng);
    if d.dot(n) < 0.05 {
        d = (d - n * (d.dot(n) - 0.5)).normalize();
    }
    q + d * rng.random_range(0.5..20.0)
}

fn check(prim: &Primitive, origin: Vector3<f64>, q: Vector3<f64>) {
    let dir = (q - origin).normalize();
    let expected = (q - origin).norm();
    let t = prim.intersect(&origin, &dir).unwrap_or_else(|| panic!("{prim:?} missed {q} from {origin}"));
    assert!((t - expected).abs() < 1e-9, "{prim:?}: {t} vs {expected}");
}

#[test]
fn plane_patches() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..RAYS {
        let center = Vector3::from_fn(|_, _| rng.random_range(-5.0..5.0));
        let u = unit(&mut rng);
        let v = u.cross(&unit(&mut rng)).normalize();
        let (hu, hv) = (rng.random_range(0.5..5.0), rng.random_range(0.5..5.0));
        let prim = Primitive::plane(center, u, v, hu, hv);
        let q = center + u * rng.random_range(-hu..hu) * 0.99 + v * rng.random_range(-hv..hv) * 0.99;
        let mut n = u.cross(&v);
        if rng.random_bool(0.5) {
            n = -n;
        }
        check(&prim, outside_origin(&mut rng, &q, &n), q);
    }
}

#[test]
fn cylinders() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for i in 0..RAYS {
        let base = Vector3::from_fn(|_, _| rng.random_range(-5.0..5.0));
        let axis = unit(&mut rng);
        let (radius, height) = (rng.random_range(0.1..3.0), rng.random_range(0.5..6.0));
        let prim = Primitive::Cylinder { base, axis, radius, height };
        let e1 = axis.cross(&unit(&mut rng)).normalize();
        let e2 = axis.cross(&e1);
        let a = rng.random_range(0.0..2.0 * PI);
        let n = e1 * a.cos() + e2 * a.sin();
        let h = rng.random_range(0.01..0.99) * height;
        let q = base + axis * h + n * radius;
        let origin = if i % 2 == 0 {
            outside_origin(&mut rng, &q, &n)
        } else {
            // strictly inside the finite cylinder
            let r = radius * rng.random_range(0.0..0.95);
            let b = rng.random_range(0.0..2.0 * PI);
            base + axis * rng.random_range(0.01..0.99) * height + (e1 * b.cos() + e2 * b.sin()) * r
        };
        check(&prim, origin, q);
    }
}

#[test]
fn spheres() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..RAYS {
        let center = Vector3::from_fn(|_, _| rng.random_range(-5.0..5.0));
        let radius = rng.random_range(0.1..4.0);
        let prim = Primitive::Sphere { center, radius };
        let n = unit(&mut rng);
        let q = center + n * radius;
        let origin = if i % 2 == 0 { outside_origin(&mut rng, &q, &n) } else { center + unit(&mut rng) * radius * rng.random_range(0.0..0.95) };
        check(&prim, origin, q);
    }
}

#[test]
fn parallel_ray_misses_plane() {
    let prim = Primitive::plane(Vector3::zeros(), Vector3::x(), Vector3::y(), 5.0, 5.0);
    assert_eq!(prim.intersect(&Vector3::new(0.0, 0.0, 1.0), &Vector3::x()), None);
    assert_eq!(prim.intersect(&Vector3::new(-9.0, 0.0, 0.0), &Vector3::x()), None);
}

#[test]
fn rays_pointing_away_miss() {
    let prim = Primitive::Sphere { center: Vector3::zeros(), radius: 1.0 };
    assert_eq!(prim.intersect(&Vector3::new(0.0, 0.0, 3.0), &Vector3::z()), None);
}

#[test]
fn room_scan_hits_are_on_walls() {
    let env = build_environment("simple_room").unwrap();
    let lidar = Transform::from_parts(&nalgebra::Matrix3::identity(), &Vector3::new(0.5, -0.3, 1.5));
    let scan = raycast_scan(&env, &lidar, &LidarModel::default(), 0.0);
    let mut hits = 0;
    for r in scan.returns.iter().filter(|r| r.valid) {
        let p = lidar.apply(&Vector3::new(r.point.x, r.point.y, 0.0));
        assert!(env.distance_to_nearest(&p) < 1e-9, "{p}");
        hits += 1;
    }
    assert_eq!(hits, 961);
}
