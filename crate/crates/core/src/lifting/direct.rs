//! Thin shell spanning a fixed boundary loop.

use super::patch::{relax, SkeletonLoop, SurfacePatch, WorkMesh};
use super::{LiftError, ShellConfig};
use crate::cp_core::{check_lift_compat, LiftKind, SkeletonSpec};

/// Fan-triangulate the loop and relax interior vertices with the uniform Laplacian.
pub(crate) fn direct_mesh(skel: &SkeletonSpec, cfg: &ShellConfig) -> Result<(WorkMesh, SkeletonLoop), LiftError> {
    let cycle = skel.loop_cycle().expect("closed loop");
    let curve = SkeletonLoop::new(skel, &cycle);
    let mut mesh = WorkMesh::fan(&curve, cfg.refinements);
    let nb = mesh.neighbors();
    let (last, _) = relax(&mut mesh, &|_, _| 1.0, &nb, cfg.smooth_tol, cfg.smooth_cap);
    if !last.is_finite() || last > cfg.diverge_tol {
        return Err(LiftError::SolveDiverged { solver: "direct shell", residual: last });
    }
    Ok((mesh, curve))
}

pub fn solve_direct_shell(skel: &SkeletonSpec, cfg: &ShellConfig) -> Result<SurfacePatch, LiftError> {
    check_lift_compat(skel, LiftKind::UniformDirectShell)?;
    let (mesh, _) = direct_mesh(skel, cfg)?;
    Ok(mesh.into_patch(skel.polytope))
}
