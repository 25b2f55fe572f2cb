use proptest::prelude::*;

use super::*;
use crate::discretize::voxelize;
use crate::frontend::examples::SCHWARZ_P;
use crate::homogenize::{isotropic_stiffness, PropertyVector};
use crate::test_fixtures::{centered_sphere, cube_frame, full_solid};

/// Materialize the 3R block and flood fill it directly.
fn brute_force_tilable(grid: &VoxelGrid) -> bool {
    let r = grid.resolution;
    for i in 0..r {
        for j in 0..r {
            if grid.get(0, i, j) != grid.get(r - 1, i, j)
                || grid.get(i, 0, j) != grid.get(i, r - 1, j)
                || grid.get(i, j, 0) != grid.get(i, j, r - 1)
            {
                return false;
            }
        }
    }
    let n = 3 * r;
    let idx = |i: usize, j: usize, k: usize| (k * n + j) * n + i;
    let solid = |i: usize, j: usize, k: usize| grid.get(i % r, j % r, k % r);
    let mut seen = vec![false; n * n * n];
    for start in 0..n * n * n {
        let (i, j, k) = (start % n, (start / n) % n, start / (n * n));
        if seen[start] || !solid(i, j, k) {
            continue;
        }
        let mut faces = [false; 6];
        let mut stack = vec![(i, j, k)];
        seen[start] = true;
        while let Some((i, j, k)) = stack.pop() {
            let c = [i, j, k];
            for a in 0..3 {
                faces[2 * a] |= c[a] == 0;
                faces[2 * a + 1] |= c[a] == n - 1;
            }
            for a in 0..3 {
                for d in [-1isize, 1] {
                    let mut q = c;
                    let v = q[a] as isize + d;
                    if v < 0 || v >= n as isize {
                        continue;
                    }
                    q[a] = v as usize;
                    if solid(q[0], q[1], q[2]) && !seen[idx(q[0], q[1], q[2])] {
                        seen[idx(q[0], q[1], q[2])] = true;
                        stack.push((q[0], q[1], q[2]));
                    }
                }
            }
        }
        if faces.iter().all(|&f| f) {
            return true;
        }
    }
    false
}

#[test]
fn full_solid_tiles() {
    let grid = voxelize(&full_solid(), 8).unwrap();
    assert_eq!(check_tilable(&grid), (true, None));
}

#[test]
fn floating_sphere_does_not_span() {
    let grid = voxelize(&centered_sphere(0.2), 16).unwrap();
    let (ok, reason) = check_tilable(&grid);
    assert!(!ok);
    assert!(reason.unwrap().contains("reaches all six faces"));
}

#[test]
fn empty_grid_is_not_tilable() {
    assert!(!check_tilable(&VoxelGrid::empty(4)).0);
}

#[test]
fn beam_frame_matches_brute_force() {
    let grid = voxelize(&cube_frame(0.5, 0.15), 16).unwrap();
    assert!(brute_force_tilable(&grid));
    assert_eq!(check_tilable(&grid), (true, None));
}

#[test]
fn mismatched_faces_are_reported() {
    let grid = VoxelGrid::from_fn(6, |i, j, _| i == 0 || j == 2);
    let (ok, reason) = check_tilable(&grid);
    assert!(!ok);
    assert!(reason.unwrap().contains("along x"));
}

#[test]
fn mirrored_structures_match_at_every_resolution() {
    let ir = cube_frame(0.25, 0.1);
    for r in [5, 8, 13, 20] {
        let grid = voxelize(&ir, r).unwrap();
        let r = grid.resolution;
        for a in 0..r {
            for b in 0..r {
                assert_eq!(grid.get(0, a, b), grid.get(r - 1, a, b));
                assert_eq!(grid.get(a, 0, b), grid.get(a, r - 1, b));
                assert_eq!(grid.get(a, b, 0), grid.get(a, b, r - 1));
            }
        }
    }
}

fn isotropic_props(e: f64, v: f64) -> (PropertyVector, StiffnessTensor) {
    let tensor = StiffnessTensor { c: isotropic_stiffness(e, 0.3) };
    (crate::homogenize::extract_properties(&tensor, v).unwrap(), tensor)
}

#[test]
fn physical_checks() {
    let (props, tensor) = isotropic_props(1.0, 1.0);
    assert_eq!(check_physical(&props, &tensor), (true, None));

    let (mut stiff, t) = isotropic_props(1.0, 1.0);
    stiff.e = 1.5;
    assert_eq!(check_physical(&stiff, &t).1.as_deref(), Some("E>1"));

    let (mut nan, t) = isotropic_props(0.5, 0.5);
    nan.nu_12 = f64::NAN;
    let (ok, reason) = check_physical(&nan, &t);
    assert!(!ok && reason.unwrap().contains("non-finite"));

    let (props, mut t) = isotropic_props(0.5, 0.5);
    t.c[(0, 1)] += 0.1;
    assert!(check_physical(&props, &t).1.unwrap().contains("symmetric"));

    let (props, mut t) = isotropic_props(0.5, 0.5);
    t.c[(3, 3)] = -0.2;
    assert!(check_physical(&props, &t).1.unwrap().contains("semi-definite"));

    let (mut props, t) = isotropic_props(0.5, 0.5);
    props.v = 0.0;
    assert!(!check_physical(&props, &t).0);
}

#[test]
fn solid_cube_properties_are_physical() {
    let grid = voxelize(&full_solid(), 4).unwrap();
    let tensor = homogenize(&grid, &BaseMaterial::default()).unwrap();
    let props = extract_properties(&tensor, grid.volume_fraction()).unwrap();
    assert_eq!(check_physical(&props, &tensor), (true, None));
}

#[test]
fn compile_check_reports_diagnostics() {
    assert_eq!(check_compiles(&SourceProgram::new(SCHWARZ_P)), (true, vec![]));
    let tile = SCHWARZ_P.replace("return obj", "return tile");
    let (ok, diags) = check_compiles(&SourceProgram::new(&tile));
    assert!(!ok);
    assert!(diags[0].message.contains("TypeError") || diags[0].message.contains("Structure"), "{:?}", diags);
    let typo = SCHWARZ_P.replace("TOP_LEFT", "TOP_LFET");
    let (ok, diags) = check_compiles(&SourceProgram::new(&typo));
    assert!(!ok);
    assert!(diags[0].message.contains("did you mean"), "{:?}", diags);
}

#[test]
fn broken_program_skips_later_stages() {
    let report = validate_model(&SourceProgram::new("def make_structure(:\n"), 16);
    assert!(!report.compiled && !report.tilable && !report.physical && !report.overall);
    assert_eq!(report.diagnostics.len(), 1);
    assert!(report.tilable_reason.is_none() && report.physical_reason.is_none());
}

#[test]
fn floating_spheres_program_fails_tiling() {
    let src = "from metagen import *\n\ndef make_structure():\n    v = vertex(cuboid.corners.BACK_TOP_RIGHT)\n    s = Spheres(skeleton([v]), 0.2)\n    e = cuboid.embed(0.5, 0.5, 0.5, cuboid.corners.FRONT_BOTTOM_LEFT)\n    return Structure(Tile([s], e), Identity())\n";
    let report = validate_model(&SourceProgram::new(src), 16);
    assert!(report.compiled);
    assert!(!report.tilable && !report.physical && !report.overall);
}

#[test]
fn schwarz_p_passes_all_checks() {
    let report = validate_model(&SourceProgram::new(SCHWARZ_P), 32);
    assert!(report.overall, "{report:?}");
    assert!(report.timings.physical_ms > 0.0);
}

proptest! {
    #[test]
    fn component_join_matches_brute_force(bits in prop::collection::vec(any::<bool>(), 64)) {
        let grid = VoxelGrid::new(4, bits);
        prop_assert_eq!(check_tilable(&grid).0, brute_force_tilable(&grid));
    }

    #[test]
    fn invariant_under_axis_permutation(seed in prop::collection::vec(prop::bool::weighted(0.6), 125), p in 0usize..6) {
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let grid = VoxelGrid::new(5, seed);
        prop_assert_eq!(check_tilable(&grid).0, check_tilable(&grid.permute_axes(perms[p])).0);
        prop_assert_eq!(check_tilable(&grid).0, check_tilable(&grid.shift([5, -5, 10])).0);
    }
}
