use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::cp_core::{
    build_skeleton, make_path, make_vertex, resolve_entity, EntityCategory, EntityRef, PolytopeKind, SkeletonItem,
    Vec3, VertexSpec,
};
use crate::lifting::{lift_spheres, lift_uniform_beams, lift_varying_beams, LiftedSkeleton, ThicknessProfile};

fn ent(p: PolytopeKind, c: EntityCategory, n: &str) -> EntityRef {
    resolve_entity(p, c, n).unwrap()
}

fn cuboid_corner(n: &str) -> EntityRef {
    ent(PolytopeKind::Cuboid, EntityCategory::Corner, n)
}

fn random_vertex(rng: &mut ChaCha8Rng, poly: PolytopeKind) -> VertexSpec {
    let cat = [EntityCategory::Corner, EntityCategory::Edge, EntityCategory::Face][rng.gen_range(0..3)];
    let idx = rng.gen_range(0..poly.entity_count(cat));
    let e = EntityRef { polytope: poly, category: cat, index: idx };
    let t: Vec<f64> = match cat {
        EntityCategory::Corner => vec![],
        EntityCategory::Edge => vec![rng.gen()],
        EntityCategory::Face => {
            if e.corners().len() == 3 {
                let a: f64 = rng.gen();
                vec![a, rng.gen::<f64>() * (1.0 - a)]
            } else {
                vec![rng.gen(), rng.gen()]
            }
        }
    };
    make_vertex(e, if t.is_empty() { None } else { Some(&t) }).unwrap()
}

fn random_lift(rng: &mut ChaCha8Rng, poly: PolytopeKind) -> LiftedSkeleton {
    if rng.gen_bool(0.2) {
        let items = (0..rng.gen_range(1..4)).map(|_| SkeletonItem::Vertex(random_vertex(rng, poly))).collect();
        return lift_spheres(&build_skeleton(items).unwrap(), rng.gen_range(0.03..0.2)).unwrap();
    }
    let mut items = Vec::new();
    while items.len() < rng.gen_range(1..4) {
        let smooth = rng.gen_bool(0.3);
        let n = if smooth { 3 } else { 2 };
        let vs: Vec<VertexSpec> = (0..n).map(|_| random_vertex(rng, poly)).collect();
        if let Ok(p) = make_path(vs, smooth) {
            items.push(SkeletonItem::Path(p));
        }
    }
    let skel = build_skeleton(items).unwrap();
    if rng.gen_bool(0.5) {
        lift_uniform_beams(&skel, rng.gen_range(0.02..0.15)).unwrap()
    } else {
        let (a, b) = (rng.gen_range(0.02..0.15), rng.gen_range(0.02..0.15));
        lift_varying_beams(&skel, ThicknessProfile::new(vec![(0.0, a), (0.4, b), (1.0, a)]).unwrap()).unwrap()
    }
}

fn random_mirror_structure(seed: u64) -> StructureIR {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let poly = PolytopeKind::ALL[rng.gen_range(0..3)];
    let sides = [0.5, 0.25];
    let (embedding, pattern) = match poly {
        PolytopeKind::Cuboid => {
            let size = Vec3::from_fn(|_, _| sides[rng.gen_range(0..2)]);
            let min = size.map(|a| if a < 0.5 && rng.gen_bool(0.5) { a } else { 0.0 });
            let corner = PolytopeKind::Cuboid.corner_names()[rng.gen_range(0..8)];
            (embed_via_minmax(min, min + size, &cuboid_corner(corner)).unwrap(), PatternOp::CuboidFullMirror)
        }
        PolytopeKind::Tet => (embed_simplex(poly, sides[rng.gen_range(0..2)]).unwrap(), PatternOp::TetFullMirror),
        PolytopeKind::TriPrism => {
            (embed_simplex(poly, sides[rng.gen_range(0..2)]).unwrap(), PatternOp::TriPrismFullMirror)
        }
    };
    let lifted = (0..rng.gen_range(1..3)).map(|_| random_lift(&mut rng, poly)).collect();
    StructureIR::new(Tile::new(lifted, embedding).unwrap(), pattern).unwrap()
}

/// Number of transformed CP interiors containing `p`, and whether a closed copy contains it.
fn multiplicity(leaf: &Leaf, inverses: &[Isometry], p: &Vec3) -> (usize, bool) {
    let emb = &leaf.tile.embedding;
    let scale = emb.size().max();
    let mut strict = 0;
    let mut closed = false;
    for inv in inverses {
        let m = emb.polytope.inside_measure(&emb.to_canonical(&inv.apply(p))) * scale;
        if m < -1e-12 {
            strict += 1;
        }
        if m <= 1e-12 {
            closed = true;
        }
    }
    (strict, closed)
}

fn paint(leaf: &Leaf, r: usize) -> (usize, usize, usize) {
    let inverses: Vec<Isometry> = leaf.transforms.isometries.iter().map(Isometry::inverse).collect();
    let (mut over, mut uncovered, mut covered) = (0, 0, 0);
    for i in 0..r {
        for j in 0..r {
            for k in 0..r {
                let p = Vec3::new(i as f64 + 0.5, j as f64 + 0.5, k as f64 + 0.5) / r as f64;
                let (m, closed) = multiplicity(leaf, &inverses, &p);
                if m > 1 {
                    over += 1;
                }
                if closed {
                    covered += 1;
                } else {
                    uncovered += 1;
                }
            }
        }
    }
    (over, uncovered, covered)
}

fn single_leaf(ir: &StructureIR) -> &Leaf {
    match ir {
        StructureIR::Leaf(l) => l,
        _ => panic!("expected a leaf"),
    }
}

fn diagonal_tile(size: f64) -> Tile {
    let v0 = make_vertex(cuboid_corner("FRONT_BOTTOM_LEFT"), None).unwrap();
    let v1 = make_vertex(cuboid_corner("BACK_TOP_RIGHT"), None).unwrap();
    let skel = build_skeleton(vec![SkeletonItem::Path(make_path(vec![v0, v1], false).unwrap())]).unwrap();
    let prof = ThicknessProfile::new(vec![(0.0, 0.03), (0.5, 0.1), (1.0, 0.03)]).unwrap();
    let lifted = lift_varying_beams(&skel, prof).unwrap();
    Tile::new(vec![lifted], embed_cuboid(size, size, size, &cuboid_corner("FRONT_BOTTOM_LEFT")).unwrap()).unwrap()
}

fn pentamode_pattern() -> PatternOp {
    let e = |n: &str| ent(PolytopeKind::Cuboid, EntityCategory::Edge, n);
    let inner = CustomOp::new(CustomKind::Rotate180(vec![e("TOP_RIGHT")]), true, None);
    PatternOp::Custom(CustomOp::new(CustomKind::Rotate180(vec![e("BACK_RIGHT"), e("BACK_LEFT")]), true, Some(inner)))
}

fn sphere_on_face(face: &str, t: [f64; 2], r: f64) -> StructureIR {
    let v = make_vertex(ent(PolytopeKind::Cuboid, EntityCategory::Face, face), Some(&t)).unwrap();
    let lifted = lift_spheres(&build_skeleton(vec![SkeletonItem::Vertex(v)]).unwrap(), r).unwrap();
    let emb = embed_cuboid(1.0, 1.0, 1.0, &cuboid_corner("FRONT_BOTTOM_LEFT")).unwrap();
    StructureIR::new(Tile::new(vec![lifted], emb).unwrap(), PatternOp::Identity).unwrap()
}

#[test]
fn identity_has_one_transform() {
    let ir = StructureIR::new(diagonal_tile(0.5), PatternOp::Identity).unwrap();
    let leaf = single_leaf(&ir);
    assert_eq!(leaf.transforms.len(), 1);
    assert!(leaf.transforms.isometries[0].is_identity());
    let report = transpile_report(&ir);
    assert_eq!(report.lines().filter(|l| is_transform_line(l)).count(), 1);
}

#[test]
fn transform_counts_per_full_mirror() {
    let tile = diagonal_tile(0.5);
    let ir = StructureIR::new(tile.clone(), PatternOp::CuboidFullMirror).unwrap();
    assert_eq!(single_leaf(&ir).transforms.len(), 8);
    let ir = StructureIR::new(diagonal_tile(0.25), PatternOp::CuboidFullMirror).unwrap();
    assert_eq!(single_leaf(&ir).transforms.len(), 64);
    for (kind, pat, s, n) in [
        (PolytopeKind::Tet, PatternOp::TetFullMirror, 0.5, 48),
        (PolytopeKind::Tet, PatternOp::TetFullMirror, 1.0, 6),
        (PolytopeKind::TriPrism, PatternOp::TriPrismFullMirror, 0.5, 16),
        (PolytopeKind::TriPrism, PatternOp::TriPrismFullMirror, 0.25, 128),
    ] {
        let set = expand_pattern(&pat, &embed_simplex(kind, s).unwrap()).unwrap();
        assert_eq!(set.len(), n, "{kind:?} at {s}");
        let mut dets: Vec<i32> = set.isometries.iter().map(|t| t.determinant().round() as i32).collect();
        dets.sort();
        dets.dedup();
        assert_eq!(dets, vec![-1, 1]);
    }
}

#[test]
fn full_mirror_patterns_cover_the_cell_exactly_once() {
    let cases: Vec<StructureIR> = vec![
        StructureIR::new(diagonal_tile(0.5), PatternOp::CuboidFullMirror).unwrap(),
        random_mirror_structure(1),
        random_mirror_structure(2),
        random_mirror_structure(3),
        {
            let emb = embed_via_minmax(
                Vec3::new(0.5, 0.25, 0.0),
                Vec3::new(1.0, 0.5, 0.125),
                &cuboid_corner("BACK_TOP_LEFT"),
            )
            .unwrap();
            let tile = Tile::new(diagonal_tile(0.5).lifted, emb).unwrap();
            StructureIR::new(tile, PatternOp::CuboidFullMirror).unwrap()
        },
    ];
    let mut kinds = Vec::new();
    for kind in [PolytopeKind::Tet, PolytopeKind::TriPrism] {
        for s in [0.5, 0.25] {
            let set = expand_pattern(
                &if kind == PolytopeKind::Tet { PatternOp::TetFullMirror } else { PatternOp::TriPrismFullMirror },
                &embed_simplex(kind, s).unwrap(),
            )
            .unwrap();
            kinds.push((kind, s, set));
        }
    }
    for ir in &cases {
        let (over, uncovered, _) = paint(single_leaf(ir), 64);
        assert_eq!((over, uncovered), (0, 0));
    }
    for (kind, s, set) in kinds {
        let v = make_vertex(EntityRef { polytope: kind, category: EntityCategory::Corner, index: 0 }, None).unwrap();
        let lifted = lift_spheres(&build_skeleton(vec![SkeletonItem::Vertex(v)]).unwrap(), 0.1).unwrap();
        let leaf =
            Leaf { tile: Tile::new(vec![lifted], embed_simplex(kind, s).unwrap()).unwrap(), pattern: PatternOp::Identity, transforms: set };
        let (over, uncovered, _) = paint(&leaf, 64);
        assert_eq!((over, uncovered), (0, 0), "{kind:?} at {s}");
    }
}

#[test]
fn pentamode_pattern_gives_four_disjoint_octants() {
    let ir = StructureIR::new(diagonal_tile(0.5), pentamode_pattern()).unwrap();
    let leaf = single_leaf(&ir);
    assert_eq!(leaf.transforms.len(), 4);
    let mut octants: Vec<[u8; 3]> = leaf
        .transforms
        .isometries
        .iter()
        .map(|t| {
            let c = t.apply(&Vec3::repeat(0.25));
            [(c.x > 0.5) as u8, (c.y > 0.5) as u8, (c.z > 0.5) as u8]
        })
        .collect();
    octants.sort();
    assert_eq!(octants, vec![[0, 0, 0], [0, 1, 0], [1, 0, 1], [1, 1, 1]]);
    let (over, uncovered, covered) = paint(leaf, 64);
    assert_eq!(over, 0);
    assert_eq!(covered, uncovered);
    assert!(transpile_report(&ir).contains("transforms: 4"));
}

#[test]
fn custom_chain_semantics() {
    let f = |n: &str| ent(PolytopeKind::Cuboid, EntityCategory::Face, n);
    let emb = embed_cuboid(0.5, 0.5, 0.5, &cuboid_corner("FRONT_BOTTOM_LEFT")).unwrap();
    let mirrors = PatternOp::Custom(CustomOp::new(
        CustomKind::Mirror(f("TOP")),
        true,
        Some(CustomOp::new(CustomKind::Mirror(f("RIGHT")), true, None)),
    ));
    assert_eq!(expand_pattern(&mirrors, &emb).unwrap().len(), 4);

    let grid = PatternOp::Custom(CustomOp::new(
        CustomKind::Translate(f("LEFT"), f("RIGHT")),
        true,
        Some(CustomOp::new(CustomKind::Translate(f("FRONT"), f("BACK")), true, None)),
    ));
    let set = expand_pattern(&grid, &emb).unwrap();
    assert_eq!(set.len(), 4);
    assert!(set.isometries.iter().all(|t| t.r == nalgebra::Matrix3::identity()));

    // Without copying, the original placement is replaced.
    let moved = PatternOp::Custom(CustomOp::new(CustomKind::Translate(f("BOTTOM"), f("TOP")), false, None));
    let set = expand_pattern(&moved, &emb).unwrap();
    assert_eq!(set.len(), 1);
    assert_eq!(set.isometries[0].t, Vec3::new(0.0, 0.0, 0.5));

    let outside = PatternOp::Custom(CustomOp::new(CustomKind::Mirror(f("LEFT")), true, None));
    assert!(matches!(expand_pattern(&outside, &emb), Err(AssemblyError::IncompatiblePattern(_))));
    let not_edge = PatternOp::Custom(CustomOp::new(CustomKind::Rotate180(vec![f("TOP")]), true, None));
    assert!(matches!(expand_pattern(&not_edge, &emb), Err(AssemblyError::IncompatiblePattern(_))));
}

#[test]
fn pattern_polytope_checks() {
    let tet = embed_simplex(PolytopeKind::Tet, 0.5).unwrap();
    assert!(matches!(expand_pattern(&pentamode_pattern(), &tet), Err(AssemblyError::UnsupportedCustomPolytope(_))));
    assert!(matches!(expand_pattern(&PatternOp::CuboidFullMirror, &tet), Err(AssemblyError::IncompatiblePattern(_))));
    let cub = embed_cuboid(0.5, 0.5, 0.5, &cuboid_corner("FRONT_BOTTOM_LEFT")).unwrap();
    assert!(matches!(expand_pattern(&PatternOp::TetFullMirror, &cub), Err(AssemblyError::IncompatiblePattern(_))));
    let misaligned =
        embed_via_minmax(Vec3::new(0.25, 0.0, 0.0), Vec3::new(0.75, 0.5, 0.5), &cuboid_corner("FRONT_BOTTOM_LEFT"));
    // 0.75 is not an allowed coordinate, so the embedding itself is refused.
    assert!(misaligned.is_err());
    let lifted = diagonal_tile(0.5).lifted;
    assert!(matches!(Tile::new(lifted, tet), Err(AssemblyError::TileMismatch(_))));
}

#[test]
fn fold_matches_enumeration_on_random_structures() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for seed in 0..6 {
        let ir = random_mirror_structure(100 + seed);
        let f = ir.compile();
        for _ in 0..2000 {
            let p = Vec3::new(rng.gen(), rng.gen(), rng.gen());
            let (a, b) = (f.eval(&p), f.eval_enumerated(&p));
            assert!((a - b).abs() < 1e-9, "seed {seed}: {a} vs {b} at {p:?}");
        }
    }
}

#[test]
fn csg_algebra_holds_pointwise() {
    let a = StructureIR::new(diagonal_tile(0.5), PatternOp::CuboidFullMirror).unwrap();
    let b = sphere_on_face("FRONT", [0.3, 0.6], 0.2);
    let full = sphere_on_face("TOP", [0.5, 0.5], 2.0);
    let empty = StructureIR::csg(CsgOp::Subtract, a.clone(), a.clone());
    let ab = StructureIR::csg(CsgOp::Union, a.clone(), b.clone()).compile();
    let ba = StructureIR::csg(CsgOp::Union, b.clone(), a.clone()).compile();
    let aa = StructureIR::csg(CsgOp::Union, a.clone(), a.clone()).compile();
    let a_full = StructureIR::csg(CsgOp::Intersect, a.clone(), full).compile();
    let a_minus_empty = StructureIR::csg(CsgOp::Subtract, a.clone(), empty.clone()).compile();
    let fa = a.compile();
    let fe = empty.compile();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..2000 {
        let p = Vec3::new(rng.gen(), rng.gen(), rng.gen());
        let va = fa.eval(&p);
        assert!(fe.eval(&p) >= 0.0);
        assert_eq!(ab.eval(&p), ba.eval(&p));
        assert_eq!(aa.eval(&p), va);
        // Pointwise identities hold on the solid set (sign), which is what the algebra promises.
        assert_eq!(a_full.eval(&p) < 0.0, va < 0.0);
        assert_eq!(a_minus_empty.eval(&p) < 0.0, va < 0.0);
    }
}

#[test]
fn report_is_deterministic_and_lists_every_transform() {
    let ir = StructureIR::csg(
        CsgOp::Union,
        StructureIR::new(diagonal_tile(0.5), PatternOp::CuboidFullMirror).unwrap(),
        StructureIR::new(diagonal_tile(0.5), pentamode_pattern()).unwrap(),
    );
    let r1 = transpile_report(&ir);
    assert_eq!(r1, transpile_report(&ir.clone()));
    assert!(r1.starts_with("Union\n"));
    assert_eq!(r1.lines().filter(|l| is_transform_line(l)).count(), 12);
    assert!(r1.contains("SpatiallyVaryingBeams"));
}

#[test]
fn transformed_tiles_stay_inside_the_cell() {
    for seed in 0..20 {
        let ir = random_mirror_structure(seed);
        let leaf = single_leaf(&ir);
        for t in &leaf.transforms.isometries {
            for p in &leaf.tile.embedding.corner_positions {
                let q = t.apply(p);
                assert!(q.iter().all(|&v| (-CELL_TOL..=1.0 + CELL_TOL).contains(&v)));
            }
        }
    }
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn beam_structure_fields_are_one_lipschitz(seed in 0u64..40, a in prop::array::uniform3(0.0f64..1.0), b in prop::array::uniform3(0.0f64..1.0)) {
            let f = random_mirror_structure(seed).compile();
            let (p, q) = (Vec3::from(a), Vec3::from(b));
            prop_assert!((f.eval(&p) - f.eval(&q)).abs() <= (p - q).norm() + 1e-12);
        }
    }
}

fn is_transform_line(l: &str) -> bool {
    let t = l.trim_start();
    t.starts_with('T') && t[1..].starts_with(|c: char| c.is_ascii_digit())
}
