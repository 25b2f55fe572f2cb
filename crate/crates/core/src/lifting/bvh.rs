//! Bounding-volume hierarchy for point-to-triangle-set distance queries.

use crate::cp_core::Vec3;

const LEAF_SIZE: usize = 4;

/// Closest point on triangle `abc` to `p`.
pub fn closest_point_on_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> Vec3 {
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

pub fn point_triangle_distance(p: &Vec3, t: &[Vec3; 3]) -> f64 {
    (p - closest_point_on_triangle(p, &t[0], &t[1], &t[2])).norm()
}

#[derive(Clone, Copy, Debug)]
struct Aabb {
    lo: Vec3,
    hi: Vec3,
}

impl Aabb {
    fn empty() -> Self {
        Aabb { lo: Vec3::repeat(f64::INFINITY), hi: Vec3::repeat(f64::NEG_INFINITY) }
    }

    fn grow(&mut self, p: &Vec3) {
        self.lo = self.lo.inf(p);
        self.hi = self.hi.sup(p);
    }

    fn dist2(&self, p: &Vec3) -> f64 {
        let d = (self.lo - p).sup(&(p - self.hi)).sup(&Vec3::zeros());
        d.norm_squared()
    }
}

#[derive(Clone, Debug)]
enum Node {
    Leaf { bbox: Aabb, start: usize, end: usize },
    Inner { bbox: Aabb, left: usize, right: usize },
}

impl Node {
    fn bbox(&self) -> &Aabb {
        match self {
            Node::Leaf { bbox, .. } | Node::Inner { bbox, .. } => bbox,
        }
    }
}

/// Immutable hierarchy over a triangle soup.
#[derive(Clone, Debug)]
pub struct TriangleBvh {
    tris: Vec<[Vec3; 3]>,
    nodes: Vec<Node>,
}

impl TriangleBvh {
    pub fn new(tris: Vec<[Vec3; 3]>) -> Self {
        let mut bvh = TriangleBvh { tris, nodes: Vec::new() };
        if !bvh.tris.is_empty() {
            let n = bvh.tris.len();
            bvh.build(0, n);
        }
        bvh
    }

    pub fn triangles(&self) -> &[[Vec3; 3]] {
        &self.tris
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let mut bbox = Aabb::empty();
        let mut cbox = Aabb::empty();
        for t in &self.tris[start..end] {
            for v in t {
                bbox.grow(v);
            }
            cbox.grow(&((t[0] + t[1] + t[2]) / 3.0));
        }
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { bbox, start, end });
            return id;
        }
        self.nodes.push(Node::Leaf { bbox, start, end });
        let ext = cbox.hi - cbox.lo;
        let axis = if ext.x >= ext.y && ext.x >= ext.z { 0 } else if ext.y >= ext.z { 1 } else { 2 };
        let mid = (start + end) / 2;
        let key = |t: &[Vec3; 3]| t[0][axis] + t[1][axis] + t[2][axis];
        self.tris[start..end].sort_by(|a, b| key(a).total_cmp(&key(b)));
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id] = Node::Inner { bbox, left, right };
        id
    }

    /// Unsigned distance from `p` to the nearest triangle (infinite when empty).
    pub fn distance(&self, p: &Vec3) -> f64 {
        if self.nodes.is_empty() {
            return f64::INFINITY;
        }
        let mut best2 = f64::INFINITY;
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if node.bbox().dist2(p) >= best2 {
                continue;
            }
            match *node {
                Node::Leaf { start, end, .. } => {
                    for t in &self.tris[start..end] {
                        let q = closest_point_on_triangle(p, &t[0], &t[1], &t[2]);
                        best2 = best2.min((p - q).norm_squared());
                    }
                }
                Node::Inner { left, right, .. } => {
                    let dl = self.nodes[left].bbox().dist2(p);
                    let dr = self.nodes[right].bbox().dist2(p);
                    if dl < dr {
                        stack.push(right);
                        stack.push(left);
                    } else {
                        stack.push(left);
                        stack.push(right);
                    }
                }
            }
        }
        best2.sqrt()
    }

    pub fn distance_brute_force(&self, p: &Vec3) -> f64 {
        self.tris.iter().map(|t| point_triangle_distance(p, t)).fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn triangle_regions() {
        let t = [Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)];
        assert!((point_triangle_distance(&Vec3::new(0.2, 0.2, 0.5), &t) - 0.5).abs() < 1e-15);
        assert!((point_triangle_distance(&Vec3::new(-1.0, -1.0, 0.0), &t) - 2f64.sqrt()).abs() < 1e-15);
        assert!((point_triangle_distance(&Vec3::new(1.0, 1.0, 0.0), &t) - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn bvh_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut v = || Vec3::new(rng.gen(), rng.gen(), rng.gen());
        let tris: Vec<[Vec3; 3]> = (0..300).map(|_| [v(), v(), v()]).collect();
        let bvh = TriangleBvh::new(tris);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..500 {
            let p = Vec3::new(rng.gen_range(-0.5..1.5), rng.gen_range(-0.5..1.5), rng.gen_range(-0.5..1.5));
            assert!((bvh.distance(&p) - bvh.distance_brute_force(&p)).abs() < 1e-12);
        }
    }
}
