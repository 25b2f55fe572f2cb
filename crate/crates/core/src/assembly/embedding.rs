//! Placing a CP in the unit cell.

use serde::{Deserialize, Serialize};

use super::AssemblyError;
use crate::cp_core::{CornerWeights, EntityCategory, EntityRef, PolytopeKind, Vec3};

/// Largest k accepted in side lengths 1/2^k.
pub const MAX_LEVEL: i32 = 6;

/// The k with `x == 1/2^k`, if any.
pub fn reciprocal_power(x: f64) -> Option<i32> {
    (0..=MAX_LEVEL).find(|&k| (x - 0.5f64.powi(k)).abs() <= 1e-12)
}

fn check_side(x: f64) -> Result<(), AssemblyError> {
    reciprocal_power(x).map(|_| ()).ok_or(AssemblyError::NotPowerOfTwoReciprocal(x))
}

/// Axis-aligned affine placement of a CP: `world = origin + axes * canonical` (componentwise).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub polytope: PolytopeKind,
    pub corner_positions: Vec<Vec3>,
    pub origin: Vec3,
    /// Signed scale per axis; a negative entry mirrors that axis.
    pub axes: Vec3,
    /// The corner placed at the bounding-box minimum (cuboids only).
    pub corner_at_min: Option<EntityRef>,
}

impl Embedding {
    fn from_affine(polytope: PolytopeKind, origin: Vec3, axes: Vec3, corner_at_min: Option<EntityRef>) -> Self {
        let corner_positions =
            (0..polytope.num_corners()).map(|i| origin + axes.component_mul(&polytope.corner(i))).collect();
        Embedding { polytope, corner_positions, origin, axes, corner_at_min }
    }

    pub fn to_world(&self, canonical: &Vec3) -> Vec3 {
        self.origin + self.axes.component_mul(canonical)
    }

    pub fn to_canonical(&self, world: &Vec3) -> Vec3 {
        (world - self.origin).component_div(&self.axes)
    }

    pub fn map(&self, w: &CornerWeights) -> Vec3 {
        w.values().iter().zip(&self.corner_positions).map(|(wi, p)| p * *wi).sum()
    }

    pub fn bbox_min(&self) -> Vec3 {
        self.corner_positions.iter().fold(Vec3::repeat(f64::INFINITY), |a, p| a.inf(p))
    }

    pub fn bbox_max(&self) -> Vec3 {
        self.corner_positions.iter().fold(Vec3::repeat(f64::NEG_INFINITY), |a, p| a.sup(p))
    }

    pub fn size(&self) -> Vec3 {
        self.axes.abs()
    }

    /// World position of an entity's representative point (corner, edge midpoint, face centroid).
    pub fn entity_point(&self, e: &EntityRef) -> Vec3 {
        self.to_world(&e.centroid())
    }

    /// Corner positions of an entity in world space.
    pub fn entity_corners(&self, e: &EntityRef) -> Vec<Vec3> {
        e.corners().iter().map(|&c| self.corner_positions[c]).collect()
    }

    /// Whether a world point lies in the embedded CP (with tolerance).
    pub fn contains(&self, world: &Vec3, tol: f64) -> bool {
        let c = self.to_canonical(world);
        let scale = self.size().max();
        self.polytope.inside_measure(&c) * scale <= tol
    }
}

fn cuboid_corner(e: &EntityRef) -> Result<Vec3, AssemblyError> {
    if e.polytope != PolytopeKind::Cuboid || e.category != EntityCategory::Corner {
        return Err(AssemblyError::UnknownCorner(e.path()));
    }
    Ok(e.centroid())
}

/// Box with the given sizes, placed at `min`, with `corner_at_min` at the minimum point.
fn cuboid_box(min: Vec3, size: Vec3, corner_at_min: &EntityRef) -> Result<Embedding, AssemblyError> {
    let c = cuboid_corner(corner_at_min)?;
    // Axes where the named corner sits at canonical 1 are mirrored.
    let flip = c.map(|v| if v > 0.5 { -1.0 } else { 1.0 });
    let axes = size.component_mul(&flip);
    let origin = min + size.component_mul(&c);
    Ok(Embedding::from_affine(PolytopeKind::Cuboid, origin, axes, Some(*corner_at_min)))
}

/// Axis-aligned box of `width` (x), `depth` (y) and `height` (z) at the origin.
pub fn embed_cuboid(width: f64, height: f64, depth: f64, corner_at_min: &EntityRef) -> Result<Embedding, AssemblyError> {
    for s in [width, height, depth] {
        check_side(s)?;
    }
    cuboid_box(Vec3::zeros(), Vec3::new(width, depth, height), corner_at_min)
}

fn check_coordinate(x: f64) -> Result<(), AssemblyError> {
    if x.abs() <= 1e-12 {
        Ok(())
    } else {
        check_side(x)
    }
}

pub fn embed_via_minmax(min: Vec3, max: Vec3, corner_at_min: &EntityRef) -> Result<Embedding, AssemblyError> {
    if (0..3).any(|i| max[i] <= min[i]) {
        return Err(AssemblyError::InvertedBox);
    }
    for i in 0..3 {
        check_coordinate(min[i])?;
        check_coordinate(max[i])?;
        check_side(max[i] - min[i])?;
    }
    cuboid_box(min, max - min, corner_at_min)
}

/// Canonical tet or triangular prism scaled to the given bounding-box side.
pub fn embed_simplex(kind: PolytopeKind, bbox_side: f64) -> Result<Embedding, AssemblyError> {
    check_side(bbox_side)?;
    if kind == PolytopeKind::Cuboid {
        return Err(AssemblyError::IncompatiblePattern("cuboids are embedded with embed()".into()));
    }
    Ok(Embedding::from_affine(kind, Vec3::zeros(), Vec3::repeat(bbox_side), None))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cp_core::resolve_entity;

    fn corner(name: &str) -> EntityRef {
        resolve_entity(PolytopeKind::Cuboid, EntityCategory::Corner, name).unwrap()
    }

    #[test]
    fn half_cube_from_front_bottom_left() {
        let e = embed_cuboid(0.5, 0.5, 0.5, &corner("FRONT_BOTTOM_LEFT")).unwrap();
        assert_eq!(e.corner_positions[0], Vec3::zeros());
        for p in &e.corner_positions {
            assert!(p.iter().all(|&v| v == 0.0 || v == 0.5));
        }
        assert_eq!(embed_cuboid(0.3, 0.5, 0.5, &corner("FRONT_BOTTOM_LEFT")), Err(AssemblyError::NotPowerOfTwoReciprocal(0.3)));
    }

    #[test]
    fn every_anchor_corner_gives_a_bijection_onto_the_box() {
        for (ci, name) in PolytopeKind::Cuboid.corner_names().iter().enumerate() {
            let e = embed_cuboid(0.5, 0.25, 0.125, &corner(name)).unwrap();
            assert_eq!(e.corner_positions[ci], Vec3::zeros());
            let mut seen: Vec<[u8; 3]> = e
                .corner_positions
                .iter()
                .map(|p| [(p.x > 0.0) as u8, (p.y > 0.0) as u8, (p.z > 0.0) as u8])
                .collect();
            seen.sort();
            seen.dedup();
            assert_eq!(seen.len(), 8);
            assert_eq!(e.bbox_max(), Vec3::new(0.5, 0.125, 0.25));
        }
    }

    #[test]
    fn minmax_agrees_with_embed() {
        let c = corner("BACK_BOTTOM_RIGHT");
        let a = embed_via_minmax(Vec3::zeros(), Vec3::repeat(0.5), &c).unwrap();
        let b = embed_cuboid(0.5, 0.5, 0.5, &c).unwrap();
        assert_eq!(a.corner_positions, b.corner_positions);
        assert_eq!(embed_via_minmax(Vec3::repeat(0.5), Vec3::repeat(0.5), &c), Err(AssemblyError::InvertedBox));
    }

    #[test]
    fn simplex_embeddings() {
        let t = embed_simplex(PolytopeKind::Tet, 0.5).unwrap();
        assert_eq!(t.corner_positions.len(), 4);
        assert_eq!(t.bbox_max() - t.bbox_min(), Vec3::repeat(0.5));
        assert!(embed_simplex(PolytopeKind::Tet, 1.0).is_ok());
        let p = embed_simplex(PolytopeKind::TriPrism, 0.25).unwrap();
        // Prism volume = triangle area times depth.
        let s = p.size();
        assert!((0.5 * s.x * s.z * s.y - 0.25f64.powi(3) / 2.0).abs() < 1e-15);
    }
}
