//! Structures shared by unit tests, built directly through the library API.

use crate::assembly::{embed_cuboid, embed_simplex, CsgOp, PatternOp, StructureIR, Tile};
use crate::cp_core::{
    build_skeleton, make_path, make_vertex, resolve_entity, EntityCategory, EntityRef, PolytopeKind, SkeletonItem,
};
use crate::lifting::{lift_shell, lift_spheres, lift_uniform_beams, ShellConfig};
use crate::cp_core::LiftKind;

pub fn entity(p: PolytopeKind, c: EntityCategory, n: &str) -> EntityRef {
    resolve_entity(p, c, n).unwrap()
}

pub fn cuboid_corner(n: &str) -> EntityRef {
    entity(PolytopeKind::Cuboid, EntityCategory::Corner, n)
}

/// Sphere of radius `r` at the cell center (a corner of the lower half cube).
pub fn centered_sphere(r: f64) -> StructureIR {
    let v = make_vertex(cuboid_corner("BACK_TOP_RIGHT"), None).unwrap();
    let lifted = lift_spheres(&build_skeleton(vec![SkeletonItem::Vertex(v)]).unwrap(), r).unwrap();
    let emb = embed_cuboid(0.5, 0.5, 0.5, &cuboid_corner("FRONT_BOTTOM_LEFT")).unwrap();
    StructureIR::new(Tile::new(vec![lifted], emb).unwrap(), PatternOp::Identity).unwrap()
}

/// A sphere that contains the whole unit cell.
pub fn full_solid() -> StructureIR {
    centered_sphere(1.0)
}

pub fn empty() -> StructureIR {
    let s = centered_sphere(0.25);
    StructureIR::csg(CsgOp::Subtract, s.clone(), s)
}

/// Beams of diameter `d` along the 12 edges of a cube of side `1/2^k`, mirrored through the cell.
pub fn cube_frame(side: f64, d: f64) -> StructureIR {
    let poly = PolytopeKind::Cuboid;
    let items = poly
        .edges()
        .iter()
        .map(|(_, [a, b])| {
            let va = make_vertex(EntityRef { polytope: poly, category: EntityCategory::Corner, index: *a }, None).unwrap();
            let vb = make_vertex(EntityRef { polytope: poly, category: EntityCategory::Corner, index: *b }, None).unwrap();
            SkeletonItem::Path(make_path(vec![va, vb], false).unwrap())
        })
        .collect();
    let lifted = lift_uniform_beams(&build_skeleton(items).unwrap(), d).unwrap();
    let emb = embed_cuboid(side, side, side, &cuboid_corner("FRONT_BOTTOM_LEFT")).unwrap();
    StructureIR::new(Tile::new(vec![lifted], emb).unwrap(), PatternOp::CuboidFullMirror).unwrap()
}

pub fn schwarz_p(thickness: f64) -> StructureIR {
    let e = |n: &str| entity(PolytopeKind::Tet, EntityCategory::Edge, n);
    let vs: Vec<_> = ["BOTTOM_LEFT", "TOP_LEFT", "TOP_RIGHT", "BOTTOM_RIGHT", "BOTTOM_LEFT"]
        .iter()
        .map(|n| make_vertex(e(n), None).unwrap())
        .collect();
    let skel = build_skeleton(vec![SkeletonItem::Path(make_path(vs, true).unwrap())]).unwrap();
    let shell =
        lift_shell(&skel, LiftKind::UniformTPMSShellViaConjugation, thickness, &ShellConfig::default()).unwrap();
    let emb = embed_simplex(PolytopeKind::Tet, 0.5).unwrap();
    StructureIR::new(Tile::new(vec![shell], emb).unwrap(), PatternOp::TetFullMirror).unwrap()
}
