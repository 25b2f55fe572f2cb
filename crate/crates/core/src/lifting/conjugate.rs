//! Minimal shell by the conjugate surface construction.
//!
//! Each loop segment names a CP face the surface must meet at a right angle.
//! The conjugate of such a patch is bounded by straight lines parallel to the
//! face normals, so we solve the Plateau problem for that straight polygon,
//! rotate the discrete gradient by 90 degrees in every triangle, integrate, and
//! fit scale and offset so each boundary arc lands on its face plane.

use std::collections::{HashMap, VecDeque};

use nalgebra::{DMatrix, DVector, Matrix4, Vector4};

use super::patch::{Polygon, SurfacePatch, Tag, WorkMesh};
use super::{LiftError, ShellConfig};
use crate::cp_core::{check_lift_compat, shared_faces, LiftKind, SkeletonSpec, Vec3};

/// Pick one shared face per loop segment, preferring faces not yet used.
pub(crate) fn segment_faces(skel: &SkeletonSpec) -> Vec<usize> {
    let cycle = skel.loop_cycle().expect("closed loop");
    let n = cycle.len();
    let shared: Vec<Vec<usize>> = (0..n)
        .map(|i| shared_faces(&skel.nodes[cycle[i].node], &skel.nodes[cycle[(i + 1) % n].node]))
        .collect();
    let mut chosen: Vec<Option<usize>> = shared.iter().map(|s| (s.len() == 1).then(|| s[0])).collect();
    for i in 0..n {
        if chosen[i].is_none() {
            let pick = shared[i].iter().copied().find(|f| !chosen.contains(&Some(*f))).unwrap_or(shared[i][0]);
            chosen[i] = Some(pick);
        }
    }
    chosen.into_iter().map(|c| c.unwrap()).collect()
}

/// Edge lengths closest to all-ones that close the polygon with the given directions.
fn closing_lengths(dirs: &[Vec3]) -> Option<Vec<f64>> {
    let n = dirs.len();
    let nmat = DMatrix::from_fn(3, n, |r, c| dirs[c][r]);
    let gram = &nmat * nmat.transpose();
    let pinv = gram.pseudo_inverse(1e-12).ok()?;
    let ones = DVector::from_element(n, 1.0);
    let l = &ones - nmat.transpose() * (pinv * (&nmat * &ones));
    let max = l.max();
    if l.iter().any(|&x| x <= 1e-6 * max.max(1e-300)) {
        return None;
    }
    Some(l.iter().copied().collect())
}

/// Sparse symmetric system over interior vertices, solved by Jacobi-preconditioned CG.
fn harmonic_solve(mesh: &mut WorkMesh, w: &HashMap<(usize, usize), f64>, nb: &[Vec<usize>], tol: f64) {
    let interior: Vec<usize> = (0..mesh.pos.len()).filter(|&i| !mesh.is_boundary(i)).collect();
    let mut slot = vec![usize::MAX; mesh.pos.len()];
    for (k, &i) in interior.iter().enumerate() {
        slot[i] = k;
    }
    let m = interior.len();
    let weight = |i: usize, j: usize| w.get(&(i.min(j), i.max(j))).copied().unwrap_or(0.0).max(1e-8);
    // Row k: interior couplings (slot, w) and the boundary right-hand side.
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(m);
    let mut diag = Vec::with_capacity(m);
    let mut rhs = vec![[0.0; 3]; m];
    for (k, &i) in interior.iter().enumerate() {
        let mut row = Vec::with_capacity(nb[i].len());
        let mut d = 0.0;
        for &j in &nb[i] {
            let wij = weight(i, j);
            d += wij;
            if slot[j] == usize::MAX {
                for axis in 0..3 {
                    rhs[k][axis] += wij * mesh.pos[j][axis];
                }
            } else {
                row.push((slot[j], wij));
            }
        }
        rows.push(row);
        diag.push(d);
    }
    let apply = |x: &[f64], out: &mut [f64]| {
        for k in 0..m {
            out[k] = diag[k] * x[k] - rows[k].iter().map(|&(j, wij)| wij * x[j]).sum::<f64>();
        }
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    for axis in 0..3 {
        let b: Vec<f64> = rhs.iter().map(|r| r[axis]).collect();
        let mut x: Vec<f64> = interior.iter().map(|&i| mesh.pos[i][axis]).collect();
        let mut ax = vec![0.0; m];
        apply(&x, &mut ax);
        let mut r: Vec<f64> = (0..m).map(|k| b[k] - ax[k]).collect();
        let bnorm = dot(&b, &b).sqrt().max(1e-300);
        let mut z: Vec<f64> = (0..m).map(|k| r[k] / diag[k]).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        for _ in 0..10 * m.max(10) {
            if dot(&r, &r).sqrt() <= tol * bnorm {
                break;
            }
            apply(&p, &mut ax);
            let pap = dot(&p, &ax);
            if pap <= 0.0 {
                break;
            }
            let alpha = rz / pap;
            for k in 0..m {
                x[k] += alpha * p[k];
                r[k] -= alpha * ax[k];
                z[k] = r[k] / diag[k];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for k in 0..m {
                p[k] = z[k] + beta * p[k];
            }
        }
        for (k, &i) in interior.iter().enumerate() {
            mesh.pos[i][axis] = x[k];
        }
    }
}

/// Discrete Plateau solve with fixed boundary (iterated cotangent-harmonic maps).
pub(crate) fn plateau(mesh: &mut WorkMesh, cfg: &ShellConfig) -> Result<usize, LiftError> {
    let nb = mesh.neighbors();
    let uniform: HashMap<(usize, usize), f64> =
        nb.iter().enumerate().flat_map(|(i, js)| js.iter().map(move |&j| ((i.min(j), i.max(j)), 1.0))).collect();
    harmonic_solve(mesh, &uniform, &nb, 1e-12);
    let mut last = f64::INFINITY;
    for it in 0..cfg.plateau_cap {
        let before = mesh.pos.clone();
        let w = mesh.cotan_weights();
        harmonic_solve(mesh, &w, &nb, 1e-13);
        last = mesh.pos.iter().zip(&before).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        if !last.is_finite() {
            break;
        }
        if last < cfg.plateau_tol {
            return Ok(it + 1);
        }
    }
    if !last.is_finite() || last > cfg.diverge_tol {
        return Err(LiftError::SolveDiverged { solver: "Plateau", residual: last });
    }
    Ok(cfg.plateau_cap)
}

/// Integrate the 90-degree rotated gradient over triangles; returns vertex positions.
pub(crate) fn conjugate_positions(mesh: &WorkMesh) -> Vec<Vec3> {
    let nt = mesh.tris.len();
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut edge_tris: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (t, tri) in mesh.tris.iter().enumerate() {
        for k in 0..3 {
            edge_tris.entry(key(tri[k], tri[(k + 1) % 3])).or_default().push(t);
        }
    }
    let normal = |t: usize| {
        let [a, b, c] = mesh.tris[t];
        (mesh.pos[b] - mesh.pos[a]).cross(&(mesh.pos[c] - mesh.pos[a])).normalize()
    };
    let mid = |e: (usize, usize)| (mesh.pos[e.0] + mesh.pos[e.1]) * 0.5;
    let mut conj: HashMap<(usize, usize), Vec3> = HashMap::new();
    let mut done = vec![false; nt];
    let mut queue = VecDeque::new();
    let tri0 = mesh.tris[0];
    conj.insert(key(tri0[0], tri0[1]), Vec3::zeros());
    queue.push_back(0usize);
    done[0] = true;
    while let Some(t) = queue.pop_front() {
        let tri = mesh.tris[t];
        let n = normal(t);
        let edges: Vec<(usize, usize)> = (0..3).map(|k| key(tri[k], tri[(k + 1) % 3])).collect();
        let (known, base) = edges.iter().find_map(|e| conj.get(e).map(|v| (*e, *v))).expect("seeded edge");
        for e in &edges {
            if !conj.contains_key(e) {
                conj.insert(*e, base + n.cross(&(mid(*e) - mid(known))));
            }
            for &u in &edge_tris[e] {
                if !done[u] {
                    done[u] = true;
                    queue.push_back(u);
                }
            }
        }
    }
    let mut acc = vec![Vec3::zeros(); mesh.pos.len()];
    let mut cnt = vec![0usize; mesh.pos.len()];
    for (t, tri) in mesh.tris.iter().enumerate() {
        let n = normal(t);
        for k in 0..3 {
            let v = tri[k];
            let e = key(v, tri[(k + 1) % 3]);
            acc[v] += conj[&e] + n.cross(&(mesh.pos[v] - mid(e)));
            cnt[v] += 1;
        }
    }
    acc.iter().zip(&cnt).map(|(a, &c)| a / c as f64).collect()
}

/// Arcs a boundary vertex belongs to (corners sit on two).
fn arcs_of(tag: Tag, n: usize) -> Vec<usize> {
    match tag {
        Tag::Interior => vec![],
        Tag::Side(s, _) => vec![s],
        Tag::Corner(i) => vec![(i + n - 1) % n, i],
    }
}

pub fn solve_tpms_conjugate(skel: &SkeletonSpec, cfg: &ShellConfig) -> Result<SurfacePatch, LiftError> {
    check_lift_compat(skel, LiftKind::UniformTPMSShellViaConjugation)?;
    let poly = skel.polytope;
    let faces = segment_faces(skel);
    let n = faces.len();
    let planes: Vec<(Vec3, f64)> = faces.iter().map(|&f| poly.face_plane(f)).collect();
    let dirs: Vec<Vec3> = planes.iter().map(|p| p.0).collect();
    let lengths = closing_lengths(&dirs).ok_or_else(|| {
        LiftError::ConjugationBoundaryMismatch("the face normals admit no closed straight contour".into())
    })?;
    let mut corners = vec![Vec3::zeros()];
    for i in 0..n - 1 {
        corners.push(corners[i] + dirs[i] * lengths[i]);
    }
    let mut mesh = WorkMesh::fan(&Polygon(corners), cfg.conjugate_refinements);
    plateau(&mut mesh, cfg)?;
    let conj = conjugate_positions(&mesh);

    // Least squares for scale s and offset t: s * (n_i . X) + n_i . t = d_i on arc i.
    let mut ata = Matrix4::<f64>::zeros();
    let mut atb = Vector4::<f64>::zeros();
    let mut rows = Vec::new();
    for &v in &mesh.boundary {
        for arc in arcs_of(mesh.tags[v], n) {
            let (nrm, d) = planes[arc];
            let row = Vector4::new(nrm.dot(&conj[v]), nrm.x, nrm.y, nrm.z);
            ata += row * row.transpose();
            atb += row * d;
            rows.push((row, d));
        }
    }
    let sol = ata
        .try_inverse()
        .map(|inv| inv * atb)
        .ok_or_else(|| LiftError::ConjugationBoundaryMismatch("degenerate boundary fit".into()))?;
    let residual = rows.iter().map(|(row, d)| (row.dot(&sol) - d).abs()).fold(0.0, f64::max);
    if !residual.is_finite() || residual > cfg.conjugate_tol {
        return Err(LiftError::ConjugationBoundaryMismatch(format!(
            "boundary arcs miss their faces by {residual:.2e}"
        )));
    }
    let (s, t) = (sol[0], Vec3::new(sol[1], sol[2], sol[3]));
    let mut fitted: Vec<Vec3> = conj.iter().map(|x| x * s + t).collect();
    let outside = fitted.iter().map(|p| poly.inside_measure(p)).fold(0.0, f64::max);
    if outside > 10.0 * cfg.conjugate_tol {
        return Err(LiftError::ConjugationBoundaryMismatch(format!(
            "conjugate patch leaves the CP by {outside:.2e}"
        )));
    }
    for &v in &mesh.boundary {
        let ps: Vec<(Vec3, f64)> = arcs_of(mesh.tags[v], n).into_iter().map(|a| planes[a]).collect();
        fitted[v] = super::beams::project_onto_planes(&fitted[v], &ps);
    }
    mesh.pos = fitted;
    Ok(mesh.into_patch(poly))
}
