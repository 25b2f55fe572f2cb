//! Centripetal Catmull-Rom interpolation through control points.

use crate::cp_core::Vec3;

/// Samples per spline segment.
pub const SAMPLES_PER_SEGMENT: usize = 16;

fn knot(t: f64, a: &Vec3, b: &Vec3) -> f64 {
    // Centripetal parameterization; the floor keeps coincident points finite.
    t + (b - a).norm().sqrt().max(1e-12)
}

/// Point on the segment between `p1` and `p2` at local parameter `u` in [0, 1].
pub fn segment_point(p0: &Vec3, p1: &Vec3, p2: &Vec3, p3: &Vec3, u: f64) -> Vec3 {
    let t0 = 0.0;
    let t1 = knot(t0, p0, p1);
    let t2 = knot(t1, p1, p2);
    let t3 = knot(t2, p2, p3);
    let t = t1 + u * (t2 - t1);
    let lerp = |a: &Vec3, b: &Vec3, ta: f64, tb: f64| a * ((tb - t) / (tb - ta)) + b * ((t - ta) / (tb - ta));
    let a1 = lerp(p0, p1, t0, t1);
    let a2 = lerp(p1, p2, t1, t2);
    let a3 = lerp(p2, p3, t2, t3);
    let b1 = lerp(&a1, &a2, t0, t2);
    let b2 = lerp(&a2, &a3, t1, t3);
    lerp(&b1, &b2, t1, t2)
}

/// Neighbors of segment `i` (from `pts[i]` to `pts[i+1]`); ends of open paths are reflected.
pub fn segment_controls(pts: &[Vec3], closed: bool, i: usize) -> [Vec3; 4] {
    let n = pts.len();
    let at = |k: isize| -> Vec3 {
        if closed {
            pts[k.rem_euclid(n as isize) as usize]
        } else if k < 0 {
            pts[0] * 2.0 - pts[1]
        } else if k as usize >= n {
            pts[n - 1] * 2.0 - pts[n - 2]
        } else {
            pts[k as usize]
        }
    };
    let i = i as isize;
    [at(i - 1), at(i), at(i + 1), at(i + 2)]
}

/// Sample a spline through `pts`. For closed paths `pts` lists each point once.
/// Returns `SAMPLES_PER_SEGMENT` samples per segment; open paths also include the final point.
pub fn sample(pts: &[Vec3], closed: bool) -> Vec<Vec3> {
    let n = pts.len();
    let segs = if closed { n } else { n - 1 };
    let mut out = Vec::with_capacity(segs * SAMPLES_PER_SEGMENT + 1);
    for i in 0..segs {
        let [p0, p1, p2, p3] = segment_controls(pts, closed, i);
        for j in 0..SAMPLES_PER_SEGMENT {
            if j == 0 {
                out.push(p1);
            } else {
                out.push(segment_point(&p0, &p1, &p2, &p3, j as f64 / SAMPLES_PER_SEGMENT as f64));
            }
        }
    }
    if !closed {
        out.push(pts[n - 1]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_control_points() {
        let pts = vec![Vec3::new(0.0, 0.0, 0.0), Vec3::new(1.0, 0.2, 0.0), Vec3::new(2.0, -0.1, 0.5)];
        let s = sample(&pts, false);
        assert_eq!(s.len(), 2 * SAMPLES_PER_SEGMENT + 1);
        assert_eq!(s[0], pts[0]);
        assert_eq!(s[SAMPLES_PER_SEGMENT], pts[1]);
        assert_eq!(s[2 * SAMPLES_PER_SEGMENT], pts[2]);
        let [p0, p1, p2, p3] = segment_controls(&pts, false, 0);
        assert!((segment_point(&p0, &p1, &p2, &p3, 1.0) - pts[1]).norm() < 1e-12);
    }

    #[test]
    fn collinear_points_stay_on_line() {
        let pts: Vec<Vec3> = (0..4).map(|i| Vec3::new(i as f64, 0.0, 0.0)).collect();
        for p in sample(&pts, false) {
            assert!(p.y.abs() < 1e-12 && p.z.abs() < 1e-12);
        }
    }

    #[test]
    fn closed_loop_wraps() {
        let pts = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
        ];
        let s = sample(&pts, true);
        assert_eq!(s.len(), 4 * SAMPLES_PER_SEGMENT);
        // Symmetric square: the curve bulges outward equally on every side.
        let mid = s[SAMPLES_PER_SEGMENT / 2];
        assert!(mid.y < 0.0 && (mid.x - 0.5).abs() < 1e-12);
    }
}
