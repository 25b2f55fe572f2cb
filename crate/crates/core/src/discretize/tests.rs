use super::*;
use crate::test_fixtures::{centered_sphere, cube_frame, empty, full_solid, schwarz_p};

fn sphere_volume(r: f64) -> f64 {
    4.0 / 3.0 * std::f64::consts::PI * r.powi(3)
}

#[test]
fn solid_and_empty_fractions() {
    assert_eq!(voxelize(&full_solid(), 8).unwrap().volume_fraction(), 1.0);
    assert_eq!(voxelize(&empty(), 8).unwrap().volume_fraction(), 0.0);
    assert_eq!(extract_mesh(&empty(), 8), Err(DiscretizeError::EmptyMesh));
    assert_eq!(voxelize(&empty(), 1), Err(DiscretizeError::ResolutionRange(1)));
    assert_eq!(voxelize(&empty(), 513), Err(DiscretizeError::ResolutionRange(513)));
}

#[test]
fn centered_sphere_volume_fraction() {
    let v = voxelize(&centered_sphere(0.4), 100).unwrap().volume_fraction();
    assert!((v - sphere_volume(0.4)).abs() < 0.01, "{v}");
}

#[test]
fn voxel_error_shrinks_with_resolution() {
    let ir = centered_sphere(0.3);
    let v: Vec<f64> = [8, 16, 32, 64].iter().map(|&r| voxelize(&ir, r).unwrap().volume_fraction()).collect();
    for w in v.windows(3) {
        assert!((w[1] - w[2]).abs() <= (w[0] - w[1]).abs() + 1e-3, "{v:?}");
    }
}

#[test]
fn sphere_mesh_is_a_closed_genus_zero_surface() {
    let ir = centered_sphere(0.3);
    let r = 32;
    let mesh = extract_mesh(&ir, r).unwrap();
    assert!(mesh.is_closed_manifold());
    assert_eq!(mesh.euler_characteristic(), 2);
    let vm = mesh.signed_volume();
    let vv = voxelize(&ir, r).unwrap().volume_fraction();
    assert!((vm - vv).abs() <= 3.0 / r as f64, "{vm} vs {vv}");
    assert!((vm - sphere_volume(0.3)).abs() < 0.01);
}

#[test]
fn frame_mesh_passes_the_half_edge_audit() {
    let ir = cube_frame(0.5, 0.08);
    let r = 32;
    let mesh = extract_mesh(&ir, r).unwrap();
    assert!(mesh.is_closed_manifold());
    let vm = mesh.signed_volume();
    let vv = voxelize(&ir, r).unwrap().volume_fraction();
    assert!((vm - vv).abs() <= 3.0 / r as f64, "{vm} vs {vv}");
    let (lo, hi) = mesh.bounds();
    assert!(lo.min() >= -1e-9 && hi.max() <= 1.0 + 1e-9);
}

#[test]
fn obj_round_trip_and_determinism() {
    let mesh = extract_mesh(&centered_sphere(0.3), 16).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.obj");
    export_obj(&mesh, &path).unwrap();
    let back = import_obj(&path).unwrap();
    assert_eq!(back.vertices.len(), mesh.vertices.len());
    assert_eq!(back.triangles, mesh.triangles);
    let again = extract_mesh(&centered_sphere(0.3), 16).unwrap();
    assert_eq!(obj_string(&again), std::fs::read_to_string(&path).unwrap());
}

#[test]
fn solid_cube_front_view_is_uniform() {
    let mesh = extract_mesh(&full_solid(), 8).unwrap();
    let img = render_view(&mesh, View::Front, 64);
    let first = img.pixel(0, 0);
    assert_ne!(first, BACKGROUND);
    assert!(img.pixels.chunks(3).all(|p| p == first));
}

#[test]
fn sphere_renders_have_white_background() {
    let mesh = extract_mesh(&centered_sphere(0.25), 24).unwrap();
    for img in render_views(&mesh, 96) {
        assert_eq!(img.pixel(0, 0), BACKGROUND);
        let f = img.foreground_fraction();
        assert!(f > 0.05 && f < 0.5, "{f}");
    }
}

#[test]
fn views_follow_the_axis_convention() {
    let mesh = extract_mesh(&cube_frame(0.5, 0.15), 16).unwrap();
    for v in View::ALL {
        let (right, up) = v.basis();
        assert!((right.dot(&v.direction())).abs() < 1e-12 && (up.dot(&v.direction())).abs() < 1e-12);
        assert!((right.cross(&up) + v.direction()).norm() < 1e-12, "{v:?} is not right handed");
    }
    assert_eq!(View::Front.basis().0, crate::cp_core::Vec3::x());
    assert_eq!(View::Top.basis().1, crate::cp_core::Vec3::y());
    assert_eq!(View::Right.basis().0, crate::cp_core::Vec3::y());
    assert!(!mesh.is_empty());
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let ir = cube_frame(0.25, 0.12);
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let (g1, img1) = single.install(|| {
        let g = voxelize(&ir, 24).unwrap();
        let m = extract_mesh(&ir, 24).unwrap();
        (g, render_view(&m, View::Angled, 80))
    });
    let g2 = voxelize(&ir, 24).unwrap();
    let img2 = render_view(&extract_mesh(&ir, 24).unwrap(), View::Angled, 80);
    assert_eq!(g1, g2);
    assert_eq!(img1, img2);
    assert_eq!(img1.png_bytes().unwrap(), img2.png_bytes().unwrap());
}

#[test]
fn schwarz_p_mesh_and_renders() {
    let ir = schwarz_p(0.03);
    let mesh = extract_mesh(&ir, 48).unwrap();
    assert!(mesh.is_closed_manifold());
    for img in render_views(&mesh, 128) {
        assert!(img.foreground_fraction() >= 0.05);
    }
    assert_eq!(obj_string(&mesh), obj_string(&extract_mesh(&ir, 48).unwrap()));
}
