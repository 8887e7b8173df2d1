//! Static 3-D k-d tree supporting fixed-radius queries.

use nalgebra::Vector3;

const LEAF_SIZE: usize = 12;

#[derive(Debug, Clone)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: f64, left: usize, right: usize },
}

/// Balanced k-d tree over a borrowed point set. Points are referenced by
/// their index in the original slice.
#[derive(Debug, Clone)]
pub struct KdTree {
    nodes: Vec<Node>,
    /// Point indices, permuted so that each leaf owns a contiguous range.
    order: Vec<usize>,
    /// Positions in `order` layout.
    points: Vec<Vector3<f64>>,
}

impl KdTree {
    pub fn build(points: &[Vector3<f64>]) -> Self {
        let mut order: Vec<usize> = (0..points.len()).collect();
        let mut nodes = Vec::with_capacity(2 * points.len() / LEAF_SIZE + 1);
        if !points.is_empty() {
            build_rec(points, &mut order, 0, points.len(), &mut nodes);
        }
        let reordered = order.iter().map(|&i| points[i]).collect();
        KdTree { nodes, order, points: reordered }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Indices in leaf order. Iterating queries in this order keeps memory access local.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Calls `f(index, squared_distance)` for every point strictly closer than `radius`.
    pub fn for_each_within<F: FnMut(usize, f64)>(&self, center: &Vector3<f64>, radius: f64, mut f: F) {
        self.for_each_slot_within(center, radius, |k, d2| f(self.order[k], d2));
    }

    /// Like [`Self::for_each_within`] but reports positions in leaf order
    /// (`slot`, with `order()[slot]` the original index).
    pub fn for_each_slot_within<F: FnMut(usize, f64)>(&self, center: &Vector3<f64>, radius: f64, mut f: F) {
        if self.nodes.is_empty() || !(radius > 0.0) {
            return;
        }
        let r2 = radius * radius;
        let mut stack = [0usize; 128];
        let mut top = 1;
        while top > 0 {
            top -= 1;
            match self.nodes[stack[top]] {
                Node::Leaf { start, end } => {
                    for (k, p) in self.points[start..end].iter().enumerate() {
                        let d2 = (p - center).norm_squared();
                        if d2 < r2 {
                            f(start + k, d2);
                        }
                    }
                }
                Node::Split { axis, value, left, right } => {
                    let diff = center[axis] - value;
                    let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                    if diff * diff < r2 {
                        stack[top] = far;
                        top += 1;
                    }
                    stack[top] = near;
                    top += 1;
                }
            }
        }
    }

    /// Slot ranges of the leaves, in leaf order.
    pub fn leaves(&self) -> Vec<std::ops::Range<usize>> {
        self.nodes
            .iter()
            .filter_map(|n| match *n {
                Node::Leaf { start, end } if end > start => Some(start..end),
                _ => None,
            })
            .collect()
    }

    /// Positions in leaf order.
    pub fn slot_points(&self) -> &[Vector3<f64>] {
        &self.points
    }

    /// Appends to `out` every slot whose point lies strictly within `radius`
    /// of the axis-aligned box `[lo, hi]`.
    pub fn slots_near_box(&self, lo: &Vector3<f64>, hi: &Vector3<f64>, radius: f64, out: &mut Vec<usize>) {
        if self.nodes.is_empty() || !(radius > 0.0) {
            return;
        }
        let r2 = radius * radius;
        let mut stack = [0usize; 128];
        let mut top = 1;
        while top > 0 {
            top -= 1;
            match self.nodes[stack[top]] {
                Node::Leaf { start, end } => {
                    for (k, p) in self.points[start..end].iter().enumerate() {
                        let d = (lo - p).sup(&(p - hi)).sup(&Vector3::zeros());
                        if d.norm_squared() < r2 {
                            out.push(start + k);
                        }
                    }
                }
                Node::Split { axis, value, left, right } => {
                    if hi[axis] + radius >= value {
                        stack[top] = right;
                        top += 1;
                    }
                    if lo[axis] - radius <= value {
                        stack[top] = left;
                        top += 1;
                    }
                }
            }
        }
    }

    /// Collects the indices within `radius`, unsorted.
    pub fn within(&self, center: &Vector3<f64>, radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.for_each_within(center, radius, |i, _| out.push(i));
        out
    }
}

fn build_rec(points: &[Vector3<f64>], order: &mut [usize], start: usize, end: usize, nodes: &mut Vec<Node>) -> usize {
    let id = nodes.len();
    if end - start <= LEAF_SIZE {
        nodes.push(Node::Leaf { start, end });
        return id;
    }
    let slice = &mut order[start..end];
    let mut lo = Vector3::repeat(f64::INFINITY);
    let mut hi = Vector3::repeat(f64::NEG_INFINITY);
    for &i in slice.iter() {
        lo = lo.inf(&points[i]);
        hi = hi.sup(&points[i]);
    }
    let axis = (hi - lo).imax();
    let mid = slice.len() / 2;
    slice.select_nth_unstable_by(mid, |&a, &b| points[a][axis].total_cmp(&points[b][axis]));
    let value = points[slice[mid]][axis];
    nodes.push(Node::Leaf { start: 0, end: 0 });
    // left holds coordinates <= value, right >= value
    let left = build_rec(points, order, start, start + mid, nodes);
    let right = build_rec(points, order, start + mid, end, nodes);
    nodes[id] = Node::Split { axis, value, left, right };
    id
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn radius_query_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<Vector3<f64>> = (0..2000)
            .map(|_| Vector3::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), rng.random_range(0.0..0.5)))
            .collect();
        let tree = KdTree::build(&pts);
        assert_eq!(tree.len(), pts.len());
        for q in 0..50 {
            let c = pts[q * 17];
            let r = rng.random_range(0.05..1.5);
            let mut got = tree.within(&c, r);
            got.sort_unstable();
            let want: Vec<usize> = (0..pts.len()).filter(|&i| (pts[i] - c).norm_squared() < r * r).collect();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn duplicates_and_empty() {
        let tree = KdTree::build(&[]);
        assert!(tree.within(&Vector3::zeros(), 1.0).is_empty());
        let pts = vec![Vector3::new(1.0, 1.0, 1.0); 100];
        let tree = KdTree::build(&pts);
        assert_eq!(tree.within(&Vector3::new(1.0, 1.0, 1.0), 1e-3).len(), 100);
        assert!(tree.within(&Vector3::zeros(), 1.0).is_empty());
    }
}
