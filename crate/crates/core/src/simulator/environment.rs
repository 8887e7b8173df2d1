//! Scene primitives, ray intersection and the five built-in environments.

use std::f64::consts::PI;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Hits closer than this are ignored.
pub const RAY_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum Primitive {
    /// Rectangle centred at `center`, spanned by unit axes `u`, `v` with half extents.
    PlanePatch { center: Vector3<f64>, u: Vector3<f64>, v: Vector3<f64>, half_u: f64, half_v: f64 },
    Triangle { a: Vector3<f64>, b: Vector3<f64>, c: Vector3<f64> },
    /// Lateral surface of a finite cylinder from `base` along unit `axis`.
    Cylinder { base: Vector3<f64>, axis: Vector3<f64>, radius: f64, height: f64 },
    Sphere { center: Vector3<f64>, radius: f64 },
}

impl Primitive {
    pub fn plane(center: Vector3<f64>, u: Vector3<f64>, v: Vector3<f64>, half_u: f64, half_v: f64) -> Self {
        Primitive::PlanePatch { center, u: u.normalize(), v: v.normalize(), half_u, half_v }
    }

    pub fn vertical_cylinder(x: f64, y: f64, z0: f64, radius: f64, height: f64) -> Self {
        Primitive::Cylinder { base: Vector3::new(x, y, z0), axis: Vector3::z(), radius, height }
    }

    /// Distance along the unit direction `dir` to the nearest hit beyond [`RAY_EPS`].
    pub fn intersect(&self, origin: &Vector3<f64>, dir: &Vector3<f64>) -> Option<f64> {
        match self {
            Primitive::PlanePatch { center, u, v, half_u, half_v } => {
                let n = u.cross(v);
                let denom = n.dot(dir);
                if denom.abs() < 1e-12 {
                    return None;
                }
                let t = n.dot(&(center - origin)) / denom;
                if t <= RAY_EPS {
                    return None;
                }
                let rel = origin + dir * t - center;
                (rel.dot(u).abs() <= *half_u && rel.dot(v).abs() <= *half_v).then_some(t)
            }
            Primitive::Triangle { a, b, c } => {
                // Moller-Trumbore
                let e1 = b - a;
                let e2 = c - a;
                let p = dir.cross(&e2);
                let det = e1.dot(&p);
                if det.abs() < 1e-14 {
                    return None;
                }
                let inv = 1.0 / det;
                let s = origin - a;
                let bu = s.dot(&p) * inv;
                if !(0.0..=1.0).contains(&bu) {
                    return None;
                }
                let q = s.cross(&e1);
                let bv = dir.dot(&q) * inv;
                if bv < 0.0 || bu + bv > 1.0 {
                    return None;
                }
                let t = e2.dot(&q) * inv;
                (t > RAY_EPS).then_some(t)
            }
            Primitive::Cylinder { base, axis, radius, height } => {
                let w = origin - base;
                let d_perp = dir - axis * dir.dot(axis);
                let w_perp = w - axis * w.dot(axis);
                let a = d_perp.norm_squared();
                if a < 1e-14 {
                    return None;
                }
                let b = 2.0 * d_perp.dot(&w_perp);
                let c = w_perp.norm_squared() - radius * radius;
                solve_quadratic(a, b, c)
                    .into_iter()
                    .flatten()
                    .filter(|&t| t > RAY_EPS)
                    .find(|&t| {
                        let h = (w + dir * t).dot(axis);
                        (0.0..=*height).contains(&h)
                    })
            }
            Primitive::Sphere { center, radius } => {
                let w = origin - center;
                let b = 2.0 * w.dot(dir);
                let c = w.norm_squared() - radius * radius;
                solve_quadratic(dir.norm_squared(), b, c).into_iter().flatten().find(|&t| t > RAY_EPS)
            }
        }
    }

    /// Euclidean distance from `p` to the primitive's surface.
    pub fn distance(&self, p: &Vector3<f64>) -> f64 {
        match self {
            Primitive::PlanePatch { center, u, v, half_u, half_v } => {
                let rel = p - center;
                let cu = rel.dot(u).clamp(-half_u, *half_u);
                let cv = rel.dot(v).clamp(-half_v, *half_v);
                (rel - u * cu - v * cv).norm()
            }
            Primitive::Triangle { a, b, c } => (p - closest_on_triangle(p, a, b, c)).norm(),
            Primitive::Cylinder { base, axis, radius, height } => {
                let w = p - base;
                let h = w.dot(axis);
                let r = (w - axis * h).norm();
                let dr = (r - radius).abs();
                if (0.0..=*height).contains(&h) {
                    dr
                } else {
                    let dh = if h < 0.0 { -h } else { h - height };
                    (dr * dr + dh * dh).sqrt()
                }
            }
            Primitive::Sphere { center, radius } => ((p - center).norm() - radius).abs(),
        }
    }
}

/// Roots in ascending order, numerically stable form.
fn solve_quadratic(a: f64, b: f64, c: f64) -> [Option<f64>; 2] {
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return [None, None];
    }
    let sq = disc.sqrt();
    let q = -0.5 * (b + b.signum() * sq);
    let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / a, c / q) };
    let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
    [Some(lo), Some(hi)]
}

fn closest_on_triangle(p: &Vector3<f64>, a: &Vector3<f64>, b: &Vector3<f64>, c: &Vector3<f64>) -> Vector3<f64> {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = 1.0 / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Vector3<f64>,
    pub max: Vector3<f64>,
}

impl Aabb {
    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] && p[i] <= self.max[i])
    }
}

/// Default base pose and sinusoid amplitudes (x, y, z in m; roll, pitch, yaw in rad).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionEnvelope {
    pub base: [f64; 6],
    pub amplitude: [f64; 6],
    pub frequency: [f64; 6],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    pub name: String,
    pub primitives: Vec<Primitive>,
    /// Region the sensor may move in.
    pub free_space: Aabb,
    /// Minimum clearance between a sensor position and any surface (m).
    pub clearance: f64,
    pub motion: MotionEnvelope,
}

pub const ENVIRONMENT_NAMES: [&str; 5] = ["simple_room", "parking_lot", "plane_city", "quadratic_forest", "triangle_array"];

const ROOM_HALF: [f64; 3] = [5.0, 4.0, 3.0];

impl Environment {
    /// Nearest hit over all primitives.
    pub fn raycast(&self, origin: &Vector3<f64>, dir: &Vector3<f64>) -> Option<f64> {
        self.primitives
            .iter()
            .filter_map(|p| p.intersect(origin, dir))
            .min_by(f64::total_cmp)
    }

    pub fn distance_to_nearest(&self, p: &Vector3<f64>) -> f64 {
        self.primitives.iter().map(|q| q.distance(p)).fold(f64::INFINITY, f64::min)
    }

    /// Inside the free-space box and at least `clearance` away from every surface.
    pub fn is_free(&self, p: &Vector3<f64>) -> bool {
        self.free_space.contains(p) && self.distance_to_nearest(p) > self.clearance
    }
}

fn room_planes(lx: f64, ly: f64, h: f64) -> Vec<Primitive> {
    let (x, y, z) = (Vector3::x(), Vector3::y(), Vector3::z());
    vec![
        Primitive::plane(Vector3::new(0.0, 0.0, 0.0), x, y, lx, ly),
        Primitive::plane(Vector3::new(0.0, 0.0, h), x, y, lx, ly),
        Primitive::plane(Vector3::new(lx, 0.0, h / 2.0), y, z, ly, h / 2.0),
        Primitive::plane(Vector3::new(-lx, 0.0, h / 2.0), y, z, ly, h / 2.0),
        Primitive::plane(Vector3::new(0.0, ly, h / 2.0), x, z, lx, h / 2.0),
        Primitive::plane(Vector3::new(0.0, -ly, h / 2.0), x, z, lx, h / 2.0),
    ]
}

fn indoor_motion() -> MotionEnvelope {
    MotionEnvelope {
        base: [0.0, 0.0, 1.5, 0.0, 0.0, 0.0],
        amplitude: [1.5, 1.2, 0.3, 10f64.to_radians(), 10f64.to_radians(), 45f64.to_radians()],
        frequency: [0.1, 0.13, 0.2, 0.17, 0.23, 0.07],
    }
}

fn outdoor_motion() -> MotionEnvelope {
    MotionEnvelope {
        base: [0.0, 0.0, 1.5, 0.0, 0.0, 0.0],
        amplitude: [1.5, 1.5, 0.3, 10f64.to_radians(), 10f64.to_radians(), 60f64.to_radians()],
        frequency: [0.11, 0.09, 0.21, 0.19, 0.25, 0.06],
    }
}

/// Builds one of the named scenes.
///
/// Default dimensions: the room is 10 x 8 x 3 m with the floor at z = 0; the
/// open scenes extend roughly 12 m around the origin, where the sensor moves.
pub fn build_environment(name: &str) -> Result<Environment> {
    let room_free = Aabb {
        min: Vector3::new(-ROOM_HALF[0], -ROOM_HALF[1], 0.0),
        max: Vector3::new(ROOM_HALF[0], ROOM_HALF[1], ROOM_HALF[2]),
    };
    let open_free = Aabb { min: Vector3::new(-4.0, -4.0, 0.3), max: Vector3::new(4.0, 4.0, 4.0) };
    let ground = || Primitive::plane(Vector3::zeros(), Vector3::x(), Vector3::y(), 15.0, 15.0);
    let env = match name {
        "simple_room" => Environment {
            name: name.into(),
            primitives: room_planes(ROOM_HALF[0], ROOM_HALF[1], ROOM_HALF[2]),
            free_space: room_free,
            clearance: 0.3,
            motion: indoor_motion(),
        },
        "parking_lot" => {
            let mut primitives = room_planes(ROOM_HALF[0], ROOM_HALF[1], ROOM_HALF[2]);
            for &(x, y) in &[(-3.5, -2.8), (-3.5, 2.8), (3.5, -2.8), (3.5, 2.8), (0.0, 3.2), (0.0, -3.2)] {
                primitives.push(Primitive::vertical_cylinder(x, y, 0.0, 0.25, ROOM_HALF[2]));
            }
            Environment { name: name.into(), primitives, free_space: room_free, clearance: 0.3, motion: indoor_motion() }
        }
        "plane_city" => {
            let (x, y, z) = (Vector3::x(), Vector3::y(), Vector3::z());
            let mut primitives = vec![ground()];
            // (center, in-plane horizontal axis, half width, half height)
            let walls: [([f64; 3], Vector3<f64>, f64, f64); 10] = [
                ([6.0, 0.0, 2.0], y, 3.0, 2.0),
                ([-7.0, 1.0, 3.0], y, 4.0, 3.0),
                ([0.0, 7.0, 1.5], x, 2.5, 1.5),
                ([1.0, -6.5, 2.5], x, 3.5, 2.5),
                ([8.5, 3.0, 1.0], y, 1.0, 1.0),
                ([5.0, 5.0, 2.5], Vector3::new(1.0, -1.0, 0.0), 2.0, 2.5),
                ([-5.0, -5.0, 1.2], Vector3::new(1.0, 1.0, 0.0), 1.5, 1.2),
                ([-5.5, 6.0, 2.0], Vector3::new(1.0, 0.3, 0.0), 2.0, 2.0),
                ([10.0, -4.0, 4.0], Vector3::new(0.2, 1.0, 0.0), 5.0, 4.0),
                ([-10.0, -2.0, 2.5], y, 6.0, 2.5),
            ];
            for (c, u, hu, hv) in walls {
                primitives.push(Primitive::plane(Vector3::from(c), u, z, hu, hv));
            }
            Environment { name: name.into(), primitives, free_space: open_free, clearance: 0.3, motion: outdoor_motion() }
        }
        "quadratic_forest" => {
            let mut primitives = vec![ground()];
            let trees = [(5.5, 0.5), (4.0, 4.5), (-0.5, 6.0), (-4.5, 4.0), (-6.0, -0.5), (-4.0, -4.5), (0.5, -6.0), (4.5, -4.0), (8.0, 6.0), (-8.5, 3.0)];
            for (k, &(x, y)) in trees.iter().enumerate() {
                let trunk = 1.8 + 0.2 * (k % 3) as f64;
                let crown = 0.6 + 0.15 * (k % 4) as f64;
                primitives.push(Primitive::vertical_cylinder(x, y, 0.0, 0.2, trunk));
                primitives.push(Primitive::Sphere { center: Vector3::new(x, y, trunk + crown), radius: crown });
            }
            Environment { name: name.into(), primitives, free_space: open_free, clearance: 0.3, motion: outdoor_motion() }
        }
        "triangle_array" => Environment {
            name: name.into(),
            primitives: triangle_field(200, 0x7412),
            free_space: open_free,
            clearance: 0.3,
            motion: outdoor_motion(),
        },
        other => return Err(Error::UnknownEnvironment(other.into())),
    };
    Ok(env)
}

/// Non-intersecting random triangles in a shell 6-14 m around the origin.
fn triangle_field(count: usize, seed: u64) -> Vec<Primitive> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut placed: Vec<(Vector3<f64>, f64)> = Vec::new();
    let mut out = Vec::with_capacity(count);
    let mut tries = 0;
    while out.len() < count && tries < 100 * count {
        tries += 1;
        let r = rng.random_range(6.0..14.0);
        let az = rng.random_range(0.0..2.0 * PI);
        let center = Vector3::new(r * az.cos(), r * az.sin(), rng.random_range(-2.0..5.0));
        let size = rng.random_range(0.4..1.8);
        // bounding spheres may not overlap, which keeps triangles disjoint
        if placed.iter().any(|(c, s)| (c - center).norm() < s + size) {
            continue;
        }
        let verts: Vec<Vector3<f64>> = (0..3)
            .map(|k| {
                let a = rng.random_range(0.0..2.0 * PI);
                let e = rng.random_range(-1.2..1.2f64);
                let dir = Vector3::new(a.cos() * e.cos(), a.sin() * e.cos(), e.sin());
                let _ = k;
                center + dir * size
            })
            .collect();
        placed.push((center, size));
        out.push(Primitive::Triangle { a: verts[0], b: verts[1], c: verts[2] });
    }
    out
}
