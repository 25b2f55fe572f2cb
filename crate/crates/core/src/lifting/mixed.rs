//! Minimal shell by mean-curvature flow with sliding curve boundaries.
//!
//! Polyline boundary vertices stay fixed. Vertices on Curve segments move inside
//! the CP face planes their segment lies in; loop corners between two Curve
//! segments therefore slide along a CP edge. When every segment may slide, the
//! flow also keeps the enclosed volume constant: a free boundary otherwise lets
//! the surface drift off its minimal configuration through the volume mode.

use super::direct::direct_mesh;
use super::patch::{SkeletonLoop, SurfacePatch, Tag, WorkMesh};
use super::{LiftError, ShellConfig};
use crate::cp_core::{check_lift_compat, LiftKind, PolytopeKind, SkeletonSpec, Vec3};

#[derive(Clone, Debug)]
enum Constraint {
    Free,
    Fixed,
    /// Orthonormal blocked directions and the planes to re-project onto.
    Slide(Vec<Vec3>, Vec<(Vec3, f64)>),
}

impl Constraint {
    fn project(&self, v: &Vec3) -> Vec3 {
        match self {
            Constraint::Free => *v,
            Constraint::Fixed => Vec3::zeros(),
            Constraint::Slide(basis, _) => basis.iter().fold(*v, |acc, e| acc - e * e.dot(&acc)),
        }
    }

    fn movable(&self) -> bool {
        !matches!(self, Constraint::Fixed)
    }
}

fn slide(planes: Vec<(Vec3, f64)>) -> Constraint {
    let mut basis: Vec<Vec3> = Vec::new();
    for (n, _) in &planes {
        let r = basis.iter().fold(*n, |acc, e| acc - e * e.dot(&acc));
        if r.norm() > 1e-9 {
            basis.push(r.normalize());
        }
    }
    if basis.len() >= 3 {
        Constraint::Fixed
    } else {
        Constraint::Slide(basis, planes)
    }
}

fn constraints(mesh: &WorkMesh, curve: &SkeletonLoop) -> Vec<Constraint> {
    let n = curve.nodes.len();
    mesh.tags
        .iter()
        .map(|tag| match *tag {
            Tag::Interior => Constraint::Free,
            Tag::Side(seg, _) if curve.smooth[seg] => slide(curve.planes[seg].clone()),
            Tag::Side(..) => Constraint::Fixed,
            Tag::Corner(i) => {
                let prev = (i + n - 1) % n;
                if curve.smooth[prev] && curve.smooth[i] {
                    let mut planes = curve.planes[prev].clone();
                    for p in &curve.planes[i] {
                        if !planes.iter().any(|q| (q.0 - p.0).norm() < 1e-12) {
                            planes.push(*p);
                        }
                    }
                    slide(planes)
                } else {
                    Constraint::Fixed
                }
            }
        })
        .collect()
}

fn reproject(p: &Vec3, c: &Constraint, poly: PolytopeKind) -> Vec3 {
    match c {
        Constraint::Slide(_, planes) => {
            poly.project_inside(&super::beams::project_onto_planes(p, planes))
        }
        _ => poly.project_inside(p),
    }
}

struct Flow {
    monitor: f64,
    velocity: Vec<Vec3>,
}

/// Shape-changing part of a per-vertex vector: the normal component inside,
/// the in-plane component across the boundary curve on sliding vertices.
struct Directions {
    normal: Vec<Vec3>,
    tangent: Vec<Option<Vec3>>,
}

fn directions(mesh: &WorkMesh, cons: &[Constraint]) -> Directions {
    let vg = mesh.volume_gradient();
    let normal = vg.iter().map(|v| v.try_normalize(1e-300).unwrap_or_else(Vec3::zeros)).collect();
    let mut tangent = vec![None; mesh.pos.len()];
    let nb = mesh.boundary.len();
    for (k, &v) in mesh.boundary.iter().enumerate() {
        if let Constraint::Slide(basis, _) = &cons[v] {
            if basis.len() == 1 {
                let t = mesh.pos[mesh.boundary[(k + 1) % nb]] - mesh.pos[mesh.boundary[(k + nb - 1) % nb]];
                tangent[v] = cons[v].project(&t).try_normalize(1e-300);
            }
        }
    }
    Directions { normal, tangent }
}

fn shape_part(v: &Vec3, i: usize, cons: &[Constraint], dirs: &Directions) -> Vec3 {
    match &cons[i] {
        Constraint::Free => dirs.normal[i] * dirs.normal[i].dot(v),
        Constraint::Fixed => Vec3::zeros(),
        c @ Constraint::Slide(..) => {
            let p = c.project(v);
            match dirs.tangent[i] {
                Some(t) => p - t * t.dot(&p),
                None => p,
            }
        }
    }
}

fn flow(mesh: &WorkMesh, cons: &[Constraint], preserve_volume: bool) -> Flow {
    let (g, a) = mesh.area_gradient();
    let dirs = directions(mesh, cons);
    let mut pg: Vec<Vec3> = g.iter().enumerate().map(|(i, gi)| shape_part(gi, i, cons, &dirs)).collect();
    let mut monitor: f64 = 0.0;
    for i in 0..pg.len() {
        if cons[i].movable() && a[i] > 0.0 {
            monitor = monitor.max(pg[i].norm() / (2.0 * a[i]));
        }
    }
    if preserve_volume {
        let vg = mesh.volume_gradient();
        let pv: Vec<Vec3> = vg.iter().enumerate().map(|(i, v)| shape_part(v, i, cons, &dirs)).collect();
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..pv.len() {
            if a[i] > 0.0 {
                num += pv[i].dot(&pg[i]) / a[i];
                den += pv[i].norm_squared() / a[i];
            }
        }
        if den > 0.0 {
            let lambda = num / den;
            for i in 0..pg.len() {
                pg[i] -= pv[i] * lambda;
            }
        }
    }
    let velocity = pg
        .iter()
        .zip(&a)
        .map(|(p, &ai)| if ai > 0.0 { -p / ai } else { Vec3::zeros() })
        .collect();
    Flow { monitor, velocity }
}

/// Remove the first-order volume change of `delta` along the projected volume gradient.
fn volume_correct(mesh: &mut WorkMesh, cons: &[Constraint], dv: f64) {
    let (_, a) = mesh.area_gradient();
    let vg = mesh.volume_gradient();
    let pv: Vec<Vec3> = vg.iter().zip(cons).map(|(v, c)| c.project(v)).collect();
    let den: f64 = pv.iter().zip(&a).filter(|(_, &ai)| ai > 0.0).map(|(p, ai)| p.norm_squared() / ai).sum();
    if den <= 0.0 {
        return;
    }
    for i in 0..mesh.pos.len() {
        if a[i] > 0.0 {
            mesh.pos[i] -= pv[i] / a[i] * (dv / den);
        }
    }
}

fn signed_volume_change(before: &WorkMesh, after: &WorkMesh) -> f64 {
    let g0 = before.volume_gradient();
    let g1 = after.volume_gradient();
    (0..before.pos.len()).map(|i| 0.5 * (g0[i] + g1[i]).dot(&(after.pos[i] - before.pos[i]))).sum()
}

/// Explicit step as a fraction of the squared shortest edge (stable below ~0.5).
const STEP_FACTOR: f64 = 0.3;

fn min_edge(mesh: &WorkMesh) -> f64 {
    mesh.tris
        .iter()
        .flat_map(|t| (0..3).map(move |k| (t[k], t[(k + 1) % 3])))
        .map(|(a, b)| (mesh.pos[a] - mesh.pos[b]).norm())
        .fold(f64::INFINITY, f64::min)
}

/// Solve and also return the accepted monitor history (first entry = initialization).
pub fn solve_tpms_mixed_traced(
    skel: &SkeletonSpec,
    cfg: &ShellConfig,
) -> Result<(SurfacePatch, Vec<f64>), LiftError> {
    check_lift_compat(skel, LiftKind::UniformTPMSShellViaMixedMinimal)?;
    let (mut mesh, curve) = direct_mesh(skel, cfg)?;
    let poly = skel.polytope;
    let cons = constraints(&mesh, &curve);
    for i in 0..mesh.pos.len() {
        if matches!(cons[i], Constraint::Slide(..)) {
            mesh.pos[i] = reproject(&mesh.pos[i], &cons[i], poly);
        }
    }
    let preserve = cfg.mcf_preserve_volume && curve.smooth.iter().all(|&s| s);
    let mut current = flow(&mesh, &cons, preserve);
    let mut history = vec![current.monitor];
    let mut steps = 0;
    // Each iteration advances the flow until the monitor improves on the last
    // accepted state, so recorded iterations are monotone.
    'outer: while current.monitor >= cfg.mcf_tol && steps < cfg.mcf_cap {
        let tau = STEP_FACTOR * min_edge(&mesh).powi(2);
        let mut trial = mesh.clone();
        let mut f = flow(&trial, &cons, preserve);
        loop {
            if steps >= cfg.mcf_cap {
                break 'outer;
            }
            steps += 1;
            let before = trial.clone();
            for i in 0..trial.pos.len() {
                if cons[i].movable() {
                    let p = trial.pos[i] + f.velocity[i] * tau;
                    trial.pos[i] = reproject(&p, &cons[i], poly);
                }
            }
            if preserve {
                let dv = signed_volume_change(&before, &trial);
                volume_correct(&mut trial, &cons, dv);
                for i in 0..trial.pos.len() {
                    if cons[i].movable() {
                        trial.pos[i] = reproject(&trial.pos[i], &cons[i], poly);
                    }
                }
            }
            f = flow(&trial, &cons, preserve);
            if !f.monitor.is_finite() {
                return Err(LiftError::SolveDiverged { solver: "mean-curvature flow", residual: f.monitor });
            }
            if f.monitor <= current.monitor {
                break;
            }
        }
        mesh = trial;
        current = f;
        history.push(current.monitor);
    }
    Ok((mesh.into_patch(poly), history))
}

pub fn solve_tpms_mixed(skel: &SkeletonSpec, cfg: &ShellConfig) -> Result<SurfacePatch, LiftError> {
    solve_tpms_mixed_traced(skel, cfg).map(|(p, _)| p)
}
