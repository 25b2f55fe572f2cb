//! Beam centerlines and the cone-capsule distance.

use serde::{Deserialize, Serialize};

use super::spline;
use crate::cp_core::{shared_faces, CornerWeights, PathSpec, PolytopeKind, SkeletonSpec, Vec3, VertexSpec};

/// Sampled centerline of one path, in CP-relative weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Centerline {
    pub points: Vec<CornerWeights>,
    pub closed: bool,
}

/// Planes (outward normal, offset) of the CP faces shared by both endpoints.
pub(crate) fn segment_planes(a: &VertexSpec, b: &VertexSpec) -> Vec<(Vec3, f64)> {
    let poly = a.polytope();
    shared_faces(a, b).into_iter().map(|f| poly.face_plane(f)).collect()
}

/// Orthogonal projection onto the intersection of one or two planes.
pub(crate) fn project_onto_planes(p: &Vec3, planes: &[(Vec3, f64)]) -> Vec3 {
    match planes {
        [] => *p,
        [(n, d)] => p - n * (n.dot(p) - d),
        [(n1, d1), (n2, d2), ..] => {
            let c = n1.dot(n2);
            let r1 = n1.dot(p) - d1;
            let r2 = n2.dot(p) - d2;
            let det = 1.0 - c * c;
            if det.abs() < 1e-12 {
                return p - n1 * r1;
            }
            let alpha = (r1 - c * r2) / det;
            let beta = (r2 - c * r1) / det;
            p - n1 * alpha - n2 * beta
        }
    }
}

/// Canonical sample points of a path. Curves are splined and kept on the faces
/// their segments lie in; polylines are exact.
pub fn smooth_path_points(path: &PathSpec) -> Vec<Vec3> {
    let verts = path.distinct();
    let pts: Vec<Vec3> = verts.iter().map(|v| v.position()).collect();
    if !path.smooth {
        let mut out = pts;
        if path.closed {
            out.push(out[0]);
        }
        return out;
    }
    let poly = path.polytope();
    let n = verts.len();
    let samples = spline::sample(&pts, path.closed);
    let segs = if path.closed { n } else { n - 1 };
    let mut out = Vec::with_capacity(samples.len() + 1);
    for (k, p) in samples.iter().enumerate() {
        let seg = (k / spline::SAMPLES_PER_SEGMENT).min(segs - 1);
        let j = k % spline::SAMPLES_PER_SEGMENT;
        if j == 0 || k == samples.len() - 1 && !path.closed {
            out.push(*p);
            continue;
        }
        let planes = segment_planes(&verts[seg], &verts[(seg + 1) % n]);
        out.push(poly.project_inside(&project_onto_planes(p, &planes)));
    }
    if path.closed {
        out.push(out[0]);
    }
    out
}

pub(crate) fn centerlines(skel: &SkeletonSpec) -> Vec<Centerline> {
    skel.paths()
        .map(|p| Centerline { points: to_weights(skel.polytope, &smooth_path_points(p)), closed: p.closed })
        .collect()
}

pub(crate) fn to_weights(poly: PolytopeKind, pts: &[Vec3]) -> Vec<CornerWeights> {
    pts.iter().map(|p| CornerWeights::from_position(poly, p)).collect()
}

/// Signed distance to the union of spheres swept linearly from (a, ra) to (b, rb).
pub fn round_cone_distance(p: &Vec3, a: &Vec3, b: &Vec3, ra: f64, rb: f64) -> f64 {
    let e = b - a;
    let d = p - a;
    let len2 = e.norm_squared();
    if len2 < 1e-30 {
        return d.norm() - ra.max(rb);
    }
    if ra == rb {
        let t = (d.dot(&e) / len2).clamp(0.0, 1.0);
        return (d - e * t).norm() - ra;
    }
    let len = len2.sqrt();
    let s = d.dot(&e) / len;
    let h = (d - e * (s / len)).norm();
    let k = (rb - ra) / len;
    let g = |u: f64| ((s - u).powi(2) + h * h).sqrt() - ra - u * k;
    if k.abs() >= 1.0 {
        return g(0.0).min(g(len));
    }
    let u = (s + k * h / (1.0 - k * k).sqrt()).clamp(0.0, len);
    g(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn brute(p: &Vec3, a: &Vec3, b: &Vec3, ra: f64, rb: f64) -> f64 {
        (0..=20000)
            .map(|i| {
                let t = i as f64 / 20000.0;
                (p - (a + (b - a) * t)).norm() - (ra + (rb - ra) * t)
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn cone_matches_dense_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let a = Vec3::new(rng.gen(), rng.gen(), rng.gen());
            let b = Vec3::new(rng.gen(), rng.gen(), rng.gen());
            let (ra, rb) = (rng.gen_range(0.01..0.3), rng.gen_range(0.01..0.3));
            let p = Vec3::new(rng.gen_range(-0.5..1.5), rng.gen_range(-0.5..1.5), rng.gen_range(-0.5..1.5));
            let exact = round_cone_distance(&p, &a, &b, ra, rb);
            assert!((exact - brute(&p, &a, &b, ra, rb)).abs() < 1e-6, "{exact}");
        }
    }

    #[test]
    fn nested_spheres_use_the_larger() {
        let a = Vec3::zeros();
        let b = Vec3::new(0.1, 0.0, 0.0);
        let p = Vec3::new(-1.0, 0.0, 0.0);
        assert!((round_cone_distance(&p, &a, &b, 0.05, 0.5) - (1.1 - 0.5)).abs() < 1e-12);
    }

    #[test]
    fn line_projection_hits_both_planes() {
        let n1 = Vec3::new(0.0, 0.0, -1.0);
        let n2 = Vec3::new(1.0, 0.0, 0.0);
        let q = project_onto_planes(&Vec3::new(0.3, 0.4, 0.2), &[(n1, 0.0), (n2, 1.0)]);
        assert!((q - Vec3::new(1.0, 0.4, 0.0)).norm() < 1e-15);
    }
}
