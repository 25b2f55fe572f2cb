use super::*;
use crate::cp_core::CpError;
use crate::cp_core::{
    build_skeleton, make_path, make_vertex, resolve_entity, EntityCategory, PolytopeKind, SkeletonItem,
};

fn edge_vertex(p: PolytopeKind, name: &str) -> crate::cp_core::VertexSpec {
    make_vertex(resolve_entity(p, EntityCategory::Edge, name).unwrap(), None).unwrap()
}

fn loop_skeleton(p: PolytopeKind, names: &[&str], smooth: bool) -> SkeletonSpec {
    let mut vs: Vec<_> = names.iter().map(|n| edge_vertex(p, n)).collect();
    vs.push(vs[0].clone());
    build_skeleton(vec![SkeletonItem::Path(make_path(vs, smooth).unwrap())]).unwrap()
}

pub(crate) fn schwarz_skeleton() -> SkeletonSpec {
    loop_skeleton(PolytopeKind::Tet, &["BOTTOM_LEFT", "TOP_LEFT", "TOP_RIGHT", "BOTTOM_RIGHT"], true)
}

#[test]
fn schwarz_conjugate_meets_all_faces() {
    let skel = schwarz_skeleton();
    let patch = solve_tpms_conjugate(&skel, &ShellConfig::default()).unwrap();
    let pos = patch.positions();
    let poly = PolytopeKind::Tet;
    let mut touched = [false; 4];
    for &b in &patch.boundary_loop {
        for f in 0..4 {
            let (n, d) = poly.face_plane(f);
            if (n.dot(&pos[b]) - d).abs() < 1e-9 {
                touched[f] = true;
            }
        }
    }
    assert_eq!(touched, [true; 4]);
    for p in &pos {
        assert!(poly.inside_measure(p) < 1e-12);
    }
    // Corners sit where the P surface crosses the tet edges (level-set estimate).
    let expect = [
        Vec3::new(2.0 / 3.0, 2.0 / 3.0, 0.0),
        Vec3::new(0.5, 0.5, 0.5),
        Vec3::new(1.0, 1.0 / 3.0, 1.0 / 3.0),
        Vec3::new(1.0, 0.5, 0.0),
    ];
    for (k, e) in expect.iter().enumerate() {
        let c = pos[patch.boundary_loop[k * patch.boundary_loop.len() / 4]];
        eprintln!("corner {k}: {c:?} vs {e:?}");
        assert!((c - e).norm() < 0.05, "corner {k}: {c:?} vs {e:?}");
    }
}

#[test]
fn mixed_flow_reduces_curvature_on_schwarz_loop() {
    let (_, hist) = solve_tpms_mixed_traced(&schwarz_skeleton(), &ShellConfig::default()).unwrap();
    eprintln!("steps {} first {} last {}", hist.len(), hist[0], hist[hist.len() - 1]);
    for w in hist.windows(2) {
        assert!(w[1] <= w[0] + 1e-9);
    }
    assert!(hist[hist.len() - 1] * 100.0 <= hist[0]);
}

fn corner_loop(p: PolytopeKind, names: &[&str], smooth: bool) -> SkeletonSpec {
    let mut vs: Vec<_> = names
        .iter()
        .map(|n| make_vertex(resolve_entity(p, EntityCategory::Corner, n).unwrap(), None).unwrap())
        .collect();
    vs.push(vs[0].clone());
    build_skeleton(vec![SkeletonItem::Path(make_path(vs, smooth).unwrap())]).unwrap()
}

#[test]
fn planar_loop_gives_flat_direct_shell() {
    let skel = corner_loop(
        PolytopeKind::Cuboid,
        &["FRONT_BOTTOM_LEFT", "FRONT_BOTTOM_RIGHT", "FRONT_TOP_RIGHT", "FRONT_TOP_LEFT"],
        false,
    );
    let patch = solve_direct_shell(&skel, &ShellConfig::default()).unwrap();
    for p in patch.positions() {
        assert!(p.y.abs() < 1e-6);
    }
}

#[test]
fn skew_loop_direct_shell_matches_dense_membrane_solve() {
    let skel = loop_skeleton(
        PolytopeKind::Cuboid,
        &["FRONT_BOTTOM", "FRONT_RIGHT", "BACK_RIGHT", "BACK_TOP"],
        false,
    );
    let cfg = ShellConfig::default();
    let (mesh, curve) = direct::direct_mesh(&skel, &cfg).unwrap();

    // Oracle: assemble the uniform graph Laplacian on the same triangulation and
    // solve the interior system directly.
    let fresh = patch::WorkMesh::fan(&curve, cfg.refinements);
    let nb = fresh.neighbors();
    let interior: Vec<usize> = (0..fresh.pos.len()).filter(|&i| !fresh.is_boundary(i)).collect();
    let mut slot = vec![usize::MAX; fresh.pos.len()];
    for (k, &i) in interior.iter().enumerate() {
        slot[i] = k;
    }
    let m = interior.len();
    let mut a = nalgebra::DMatrix::<f64>::zeros(m, m);
    let mut b = nalgebra::DMatrix::<f64>::zeros(m, 3);
    for (k, &i) in interior.iter().enumerate() {
        a[(k, k)] = nb[i].len() as f64;
        for &j in &nb[i] {
            if slot[j] == usize::MAX {
                for ax in 0..3 {
                    b[(k, ax)] += fresh.pos[j][ax];
                }
            } else {
                a[(k, slot[j])] -= 1.0;
            }
        }
    }
    let x = a.lu().solve(&b).unwrap();
    let mut worst: f64 = 0.0;
    for (k, &i) in interior.iter().enumerate() {
        let oracle = Vec3::new(x[(k, 0)], x[(k, 1)], x[(k, 2)]);
        worst = worst.max((oracle - mesh.pos[i]).norm());
    }
    assert!(worst < 1e-3, "max deviation from dense solve {worst}");

    // A saddle: the patch leaves both planes spanned by alternate boundary triples.
    let c: Vec<Vec3> = curve.nodes.clone();
    let plane = |a: Vec3, b: Vec3, d: Vec3| {
        let n = (b - a).cross(&(d - a)).normalize();
        (n, n.dot(&a))
    };
    for (n, d) in [plane(c[0], c[1], c[2]), plane(c[1], c[2], c[3])] {
        let dev = mesh.pos.iter().map(|p| (n.dot(p) - d).abs()).fold(0.0, f64::max);
        assert!(dev > 1e-2);
    }
}

#[test]
fn open_path_is_rejected_by_shell_solvers() {
    let vs = vec![edge_vertex(PolytopeKind::Cuboid, "FRONT_BOTTOM"), edge_vertex(PolytopeKind::Cuboid, "BACK_TOP")];
    let skel = build_skeleton(vec![SkeletonItem::Path(make_path(vs, false).unwrap())]).unwrap();
    let cfg = ShellConfig::default();
    for r in [solve_direct_shell(&skel, &cfg), solve_tpms_mixed(&skel, &cfg), solve_tpms_conjugate(&skel, &cfg)] {
        assert!(matches!(r, Err(LiftError::Cp(CpError::IncompatibleLift { .. }))));
    }
}

#[test]
fn polyline_mixed_flow_matches_plateau_surface() {
    let skel = loop_skeleton(PolytopeKind::Tet, &["BOTTOM_LEFT", "TOP_LEFT", "TOP_RIGHT", "BOTTOM_RIGHT"], false);
    let cfg = ShellConfig::default();
    let mixed = solve_tpms_mixed(&skel, &cfg).unwrap();
    let (mut plate, _) = direct::direct_mesh(&skel, &cfg).unwrap();
    conjugate::plateau(&mut plate, &cfg).unwrap();
    let tri = |pos: &[Vec3], tris: &[[usize; 3]]| {
        TriangleBvh::new(tris.iter().map(|t| [pos[t[0]], pos[t[1]], pos[t[2]]]).collect())
    };
    let mpos = mixed.positions();
    let a = tri(&mpos, &mixed.triangles);
    let b = tri(&plate.pos, &plate.tris);
    let d_ab = plate.pos.iter().map(|p| a.distance(p)).fold(0.0, f64::max);
    let d_ba = mpos.iter().map(|p| b.distance(p)).fold(0.0, f64::max);
    assert!(d_ab.max(d_ba) < 5e-3, "surfaces differ by {}", d_ab.max(d_ba));
    // Fixed boundary: Polyline loop vertices never move.
    for (&i, &j) in mixed.boundary_loop.iter().zip(&plate.boundary) {
        assert!((mpos[i] - plate.pos[j]).norm() < 1e-12);
    }
}

#[test]
fn cuboid_hexagon_conjugate_returns_a_patch() {
    let skel = loop_skeleton(
        PolytopeKind::Cuboid,
        &["FRONT_BOTTOM", "BOTTOM_RIGHT", "BACK_RIGHT", "BACK_TOP", "TOP_LEFT", "FRONT_LEFT"],
        true,
    );
    let patch = solve_tpms_conjugate(&skel, &ShellConfig::default()).unwrap();
    assert!(!patch.triangles.is_empty());
    for p in patch.positions() {
        assert!(PolytopeKind::Cuboid.inside_measure(&p) < 1e-12);
    }
}

#[test]
fn loop_missing_a_face_cannot_be_conjugated() {
    let skel = loop_skeleton(PolytopeKind::Tet, &["BOTTOM_LEFT", "BOTTOM_FRONT", "BOTTOM_RIGHT"], true);
    let r = solve_tpms_conjugate(&skel, &ShellConfig::default());
    assert!(matches!(r, Err(LiftError::Cp(CpError::IncompatibleLift { .. }))));
}

#[test]
fn shell_field_is_minus_half_thickness_on_the_surface() {
    let lifted = lift_shell(&schwarz_skeleton(), LiftKind::UniformDirectShell, 0.04, &ShellConfig::default()).unwrap();
    let prims = lifted.primitives(&|w| w.position());
    let patch = lifted.surface.as_ref().unwrap();
    let pos = patch.positions();
    for p in &pos {
        assert!((prims.eval(p) + 0.02).abs() < 1e-12);
    }
    // Offset along a triangle normal from its centroid by t/2 lands on the zero level.
    let t = patch.triangles[patch.triangles.len() / 2];
    let (a, b, c) = (pos[t[0]], pos[t[1]], pos[t[2]]);
    let n = (b - a).cross(&(c - a)).normalize();
    let q = (a + b + c) / 3.0 + n * 0.02;
    assert!(prims.eval(&q).abs() < 1e-3);
}
