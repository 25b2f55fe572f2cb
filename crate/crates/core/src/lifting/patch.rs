//! Triangulated disc patches bounded by a skeleton loop.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::beams::{project_onto_planes, segment_planes};
use super::spline;
use crate::cp_core::{CornerWeights, LoopStep, PolytopeKind, SkeletonSpec, Vec3};

/// Solved shell surface in CP-relative weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfacePatch {
    pub vertices: Vec<CornerWeights>,
    pub triangles: Vec<[usize; 3]>,
    /// Boundary vertex indices ordered like the skeleton loop.
    pub boundary_loop: Vec<usize>,
}

impl SurfacePatch {
    pub fn positions(&self) -> Vec<Vec3> {
        self.vertices.iter().map(|w| w.position()).collect()
    }
}

/// Where a boundary position comes from.
pub(crate) trait LoopCurve {
    fn num_segments(&self) -> usize;
    fn corner(&self, i: usize) -> Vec3;
    /// Point on segment `seg` at local parameter `t` in (0, 1).
    fn point(&self, seg: usize, t: f64) -> Vec3;
}

/// Skeleton loop with per-segment smoothing and host planes.
pub(crate) struct SkeletonLoop {
    pub polytope: PolytopeKind,
    pub nodes: Vec<Vec3>,
    pub smooth: Vec<bool>,
    pub planes: Vec<Vec<(Vec3, f64)>>,
}

impl SkeletonLoop {
    pub fn new(skel: &SkeletonSpec, cycle: &[LoopStep]) -> Self {
        let n = cycle.len();
        let verts: Vec<_> = cycle.iter().map(|s| &skel.nodes[s.node]).collect();
        SkeletonLoop {
            polytope: skel.polytope,
            nodes: verts.iter().map(|v| v.position()).collect(),
            smooth: cycle.iter().map(|s| s.smooth).collect(),
            planes: (0..n).map(|i| segment_planes(verts[i], verts[(i + 1) % n])).collect(),
        }
    }
}

impl LoopCurve for SkeletonLoop {
    fn num_segments(&self) -> usize {
        self.nodes.len()
    }

    fn corner(&self, i: usize) -> Vec3 {
        self.nodes[i]
    }

    fn point(&self, seg: usize, t: f64) -> Vec3 {
        let n = self.nodes.len();
        if !self.smooth[seg] {
            return self.nodes[seg] * (1.0 - t) + self.nodes[(seg + 1) % n] * t;
        }
        let [p0, p1, p2, p3] = spline::segment_controls(&self.nodes, true, seg);
        let p = spline::segment_point(&p0, &p1, &p2, &p3, t);
        self.polytope.project_inside(&project_onto_planes(&p, &self.planes[seg]))
    }
}

/// Straight-sided polygon.
pub(crate) struct Polygon(pub Vec<Vec3>);

impl LoopCurve for Polygon {
    fn num_segments(&self) -> usize {
        self.0.len()
    }

    fn corner(&self, i: usize) -> Vec3 {
        self.0[i]
    }

    fn point(&self, seg: usize, t: f64) -> Vec3 {
        self.0[seg] * (1.0 - t) + self.0[(seg + 1) % self.0.len()] * t
    }
}

/// Boundary role of a mesh vertex.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Tag {
    Interior,
    /// Loop corner `i` (start of segment `i`).
    Corner(usize),
    /// Interior point of segment `seg` at parameter `t`.
    Side(usize, f64),
}

/// Working mesh in canonical coordinates.
#[derive(Clone, Debug)]
pub(crate) struct WorkMesh {
    pub pos: Vec<Vec3>,
    pub tris: Vec<[usize; 3]>,
    pub tags: Vec<Tag>,
    pub boundary: Vec<usize>,
}

impl WorkMesh {
    /// Fan from the corner centroid, then `rounds` of 1-to-4 refinement with
    /// new boundary vertices placed on the loop curve.
    pub fn fan(curve: &dyn LoopCurve, rounds: u32) -> Self {
        let n = curve.num_segments();
        let mut pos: Vec<Vec3> = (0..n).map(|i| curve.corner(i)).collect();
        let mut tags: Vec<Tag> = (0..n).map(Tag::Corner).collect();
        let center = pos.iter().sum::<Vec3>() / n as f64;
        pos.push(center);
        tags.push(Tag::Interior);
        let c = n;
        let mut tris: Vec<[usize; 3]> = (0..n).map(|i| [c, i, (i + 1) % n]).collect();
        // Loop parameter in [0, n) for boundary vertices.
        let param = |tag: Tag| match tag {
            Tag::Corner(i) => Some(i as f64),
            Tag::Side(s, t) => Some(s as f64 + t),
            Tag::Interior => None,
        };
        for _ in 0..rounds {
            let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
            let mut boundary_edges: HashMap<(usize, usize), usize> = HashMap::new();
            for t in &tris {
                for k in 0..3 {
                    let (a, b) = (t[k], t[(k + 1) % 3]);
                    *boundary_edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
                }
            }
            let mut new_tris = Vec::with_capacity(tris.len() * 4);
            for t in &tris {
                let mut m = [0usize; 3];
                for k in 0..3 {
                    let (a, b) = (t[k], t[(k + 1) % 3]);
                    let key = (a.min(b), a.max(b));
                    m[k] = *mids.entry(key).or_insert_with(|| {
                        let on_boundary = boundary_edges[&key] == 1;
                        let (tag, p) = match (on_boundary, param(tags[a]), param(tags[b])) {
                            (true, Some(pa), Some(pb)) => {
                                let (lo, hi) = if (pa - pb).abs() > n as f64 / 2.0 {
                                    // Edge wraps past corner 0.
                                    (pa.max(pb), pa.min(pb) + n as f64)
                                } else {
                                    (pa.min(pb), pa.max(pb))
                                };
                                let mid = 0.5 * (lo + hi);
                                let mid = if mid >= n as f64 { mid - n as f64 } else { mid };
                                let seg = (mid.floor() as usize).min(n - 1);
                                let tt = mid - seg as f64;
                                (Tag::Side(seg, tt), curve.point(seg, tt))
                            }
                            _ => (Tag::Interior, (pos[a] + pos[b]) * 0.5),
                        };
                        pos.push(p);
                        tags.push(tag);
                        pos.len() - 1
                    });
                }
                new_tris.push([t[0], m[0], m[2]]);
                new_tris.push([m[0], t[1], m[1]]);
                new_tris.push([m[2], m[1], t[2]]);
                new_tris.push([m[0], m[1], m[2]]);
            }
            tris = new_tris;
        }
        let mut boundary: Vec<usize> = (0..pos.len()).filter(|&i| param(tags[i]).is_some()).collect();
        boundary.sort_by(|&a, &b| param(tags[a]).unwrap().total_cmp(&param(tags[b]).unwrap()));
        WorkMesh { pos, tris, tags, boundary }
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.tags[i] != Tag::Interior
    }

    /// Vertex neighbor lists.
    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut nb = vec![Vec::new(); self.pos.len()];
        for t in &self.tris {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                if !nb[a].contains(&b) {
                    nb[a].push(b);
                }
                if !nb[b].contains(&a) {
                    nb[b].push(a);
                }
            }
        }
        nb
    }

    /// Symmetric cotangent weights per undirected edge.
    pub fn cotan_weights(&self) -> HashMap<(usize, usize), f64> {
        let mut w = HashMap::new();
        for t in &self.tris {
            for k in 0..3 {
                let (i, j, o) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
                let u = self.pos[i] - self.pos[o];
                let v = self.pos[j] - self.pos[o];
                let cot = u.dot(&v) / u.cross(&v).norm().max(1e-300);
                *w.entry((i.min(j), i.max(j))).or_insert(0.0) += 0.5 * cot;
            }
        }
        w
    }

    #[cfg(test)]
    pub fn area(&self) -> f64 {
        self.tris
            .iter()
            .map(|t| 0.5 * (self.pos[t[1]] - self.pos[t[0]]).cross(&(self.pos[t[2]] - self.pos[t[0]])).norm())
            .sum()
    }

    /// Per-vertex area gradient and one-third barycentric area.
    pub fn area_gradient(&self) -> (Vec<Vec3>, Vec<f64>) {
        let mut g = vec![Vec3::zeros(); self.pos.len()];
        let mut a = vec![0.0; self.pos.len()];
        for t in &self.tris {
            let (p0, p1, p2) = (self.pos[t[0]], self.pos[t[1]], self.pos[t[2]]);
            let cr = (p1 - p0).cross(&(p2 - p0));
            let len = cr.norm();
            if len < 1e-300 {
                continue;
            }
            let nrm = cr / len;
            g[t[0]] += nrm.cross(&(p2 - p1)) * 0.5;
            g[t[1]] += nrm.cross(&(p0 - p2)) * 0.5;
            g[t[2]] += nrm.cross(&(p1 - p0)) * 0.5;
            for &v in t {
                a[v] += len / 6.0;
            }
        }
        (g, a)
    }

    /// Gradient of enclosed volume (one third of the area-weighted normals).
    pub fn volume_gradient(&self) -> Vec<Vec3> {
        let mut g = vec![Vec3::zeros(); self.pos.len()];
        for t in &self.tris {
            let (p0, p1, p2) = (self.pos[t[0]], self.pos[t[1]], self.pos[t[2]]);
            let an = (p1 - p0).cross(&(p2 - p0)) / 6.0;
            for &v in t {
                g[v] += an;
            }
        }
        g
    }

    pub fn into_patch(self, polytope: PolytopeKind) -> SurfacePatch {
        SurfacePatch {
            vertices: self
                .pos
                .iter()
                .map(|p| CornerWeights::from_position(polytope, &polytope.project_inside(p)))
                .collect(),
            triangles: self.tris,
            boundary_loop: self.boundary,
        }
    }
}

/// Gauss-Seidel relaxation of interior vertices toward the weighted average of
/// their neighbors. Returns the largest move of the final sweep and the sweep count.
pub(crate) fn relax(
    mesh: &mut WorkMesh,
    weights: &dyn Fn(usize, usize) -> f64,
    nb: &[Vec<usize>],
    tol: f64,
    cap: usize,
) -> (f64, usize) {
    let mut last = f64::INFINITY;
    for sweep in 0..cap {
        let mut max_move: f64 = 0.0;
        for i in 0..mesh.pos.len() {
            if mesh.is_boundary(i) {
                continue;
            }
            let mut acc = Vec3::zeros();
            let mut wsum = 0.0;
            for &j in &nb[i] {
                let w = weights(i, j);
                acc += mesh.pos[j] * w;
                wsum += w;
            }
            if wsum <= 0.0 {
                continue;
            }
            let new = acc / wsum;
            max_move = max_move.max((new - mesh.pos[i]).norm());
            mesh.pos[i] = new;
        }
        last = max_move;
        if max_move < tol {
            return (last, sweep + 1);
        }
    }
    (last, cap)
}
