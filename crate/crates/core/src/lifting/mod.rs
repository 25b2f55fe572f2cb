//! Lifting procedures: promote skeletons to solid recipes.
//!
//! Beams and spheres keep their centerlines in CP-relative weights. Shell kinds
//! solve a surface patch in canonical CP coordinates and store it as weights,
//! so the same recipe can be embedded at any scale.

mod beams;
pub mod bvh;
mod conjugate;
mod direct;
mod mixed;
mod patch;
pub mod spline;

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cp_core::{check_lift_compat, CornerWeights, CpError, LiftKind, SkeletonSpec, Vec3};

pub use beams::{round_cone_distance, smooth_path_points, Centerline};
pub use bvh::TriangleBvh;
pub use conjugate::solve_tpms_conjugate;
pub use direct::solve_direct_shell;
pub use mixed::{solve_tpms_mixed, solve_tpms_mixed_traced};
pub use patch::SurfacePatch;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LiftError {
    #[error(transparent)]
    Cp(#[from] CpError),
    #[error("thickness must be positive, got {0}")]
    NonPositiveThickness(f64),
    #[error("thickness profile positions must be strictly increasing")]
    ProfileNotIncreasing,
    #[error("invalid thickness profile: {0}")]
    ProfileRange(String),
    #[error("{solver} did not converge (residual {residual:.3e})")]
    SolveDiverged { solver: &'static str, residual: f64 },
    #[error("conjugate surface does not meet the required CP faces: {0}")]
    ConjugationBoundaryMismatch(String),
}

/// Numerical settings for the shell solvers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShellConfig {
    /// 1-to-4 refinement rounds applied to the fan triangulation.
    pub refinements: u32,
    /// Refinement used for the Plateau problem behind the conjugate construction.
    pub conjugate_refinements: u32,
    pub smooth_tol: f64,
    pub smooth_cap: usize,
    pub diverge_tol: f64,
    pub mcf_tol: f64,
    pub mcf_cap: usize,
    /// Keep the enclosed volume fixed when the whole boundary may slide.
    pub mcf_preserve_volume: bool,
    pub plateau_tol: f64,
    pub plateau_cap: usize,
    pub conjugate_tol: f64,
}

impl Default for ShellConfig {
    fn default() -> Self {
        ShellConfig {
            refinements: 3,
            conjugate_refinements: 5,
            smooth_tol: 1e-6,
            smooth_cap: 2000,
            diverge_tol: 1e-3,
            mcf_tol: 1e-4,
            mcf_cap: 5000,
            mcf_preserve_volume: true,
            plateau_tol: 1e-9,
            plateau_cap: 200,
            conjugate_tol: 1e-3,
        }
    }
}

/// Beam diameters sampled along normalized arc length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThicknessProfile {
    pub samples: Vec<(f64, f64)>,
}

impl ThicknessProfile {
    pub fn new(samples: Vec<(f64, f64)>) -> Result<Self, LiftError> {
        if samples.len() < 2 {
            return Err(LiftError::ProfileRange("a profile needs at least 2 samples".into()));
        }
        for w in samples.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(LiftError::ProfileNotIncreasing);
            }
        }
        let (t0, tn) = (samples[0].0, samples[samples.len() - 1].0);
        if t0 != 0.0 || tn != 1.0 {
            return Err(LiftError::ProfileRange(format!("positions must span [0, 1], got [{t0}, {tn}]")));
        }
        if let Some(&(_, d)) = samples.iter().find(|s| !(s.1 > 0.0) || !s.1.is_finite()) {
            return Err(LiftError::NonPositiveThickness(d));
        }
        Ok(ThicknessProfile { samples })
    }

    pub fn constant(d: f64) -> Result<Self, LiftError> {
        Self::new(vec![(0.0, d), (1.0, d)])
    }

    /// Piecewise-linear diameter at `t`.
    pub fn diameter_at(&self, t: f64) -> f64 {
        let s = &self.samples;
        let t = t.clamp(0.0, 1.0);
        let k = s.partition_point(|&(ti, _)| ti <= t).clamp(1, s.len() - 1);
        let (t0, d0) = s[k - 1];
        let (t1, d1) = s[k];
        d0 + (d1 - d0) * (t - t0) / (t1 - t0)
    }

    pub fn mean_diameter(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0))
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Thickness {
    Uniform(f64),
    Profile(ThicknessProfile),
}

impl Thickness {
    /// Representative scalar (the profile mean for varying beams).
    pub fn scalar(&self) -> f64 {
        match self {
            Thickness::Uniform(t) => *t,
            Thickness::Profile(p) => p.mean_diameter(),
        }
    }
}

/// A skeleton together with the recipe for its solid.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedSkeleton {
    pub skeleton: SkeletonSpec,
    pub kind: LiftKind,
    pub thickness: Thickness,
    pub centerlines: Vec<Centerline>,
    pub surface: Option<SurfacePatch>,
}

fn check_positive(t: f64) -> Result<(), LiftError> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(LiftError::NonPositiveThickness(t))
    }
}

pub fn lift_uniform_beams(skel: &SkeletonSpec, thickness: f64) -> Result<LiftedSkeleton, LiftError> {
    check_lift_compat(skel, LiftKind::UniformBeams)?;
    check_positive(thickness)?;
    Ok(LiftedSkeleton {
        skeleton: skel.clone(),
        kind: LiftKind::UniformBeams,
        thickness: Thickness::Uniform(thickness),
        centerlines: beams::centerlines(skel),
        surface: None,
    })
}

pub fn lift_varying_beams(skel: &SkeletonSpec, profile: ThicknessProfile) -> Result<LiftedSkeleton, LiftError> {
    check_lift_compat(skel, LiftKind::SpatiallyVaryingBeams)?;
    let profile = ThicknessProfile::new(profile.samples)?;
    Ok(LiftedSkeleton {
        skeleton: skel.clone(),
        kind: LiftKind::SpatiallyVaryingBeams,
        thickness: Thickness::Profile(profile),
        centerlines: beams::centerlines(skel),
        surface: None,
    })
}

pub fn lift_spheres(skel: &SkeletonSpec, radius: f64) -> Result<LiftedSkeleton, LiftError> {
    check_lift_compat(skel, LiftKind::Spheres)?;
    check_positive(radius)?;
    Ok(LiftedSkeleton {
        skeleton: skel.clone(),
        kind: LiftKind::Spheres,
        thickness: Thickness::Uniform(radius),
        centerlines: Vec::new(),
        surface: None,
    })
}

/// Lift a closed loop to a shell of the given kind, solving its surface eagerly.
pub fn lift_shell(
    skel: &SkeletonSpec,
    kind: LiftKind,
    thickness: f64,
    cfg: &ShellConfig,
) -> Result<LiftedSkeleton, LiftError> {
    check_lift_compat(skel, kind)?;
    check_positive(thickness)?;
    if !kind.is_shell() {
        return Err(LiftError::Cp(CpError::IncompatibleLift {
            kind: kind.name().to_string(),
            rule: "not a shell lifting procedure".to_string(),
        }));
    }
    let patch = cached_shell_solve(skel, kind, cfg)?;
    Ok(LiftedSkeleton {
        skeleton: skel.clone(),
        kind,
        thickness: Thickness::Uniform(thickness),
        centerlines: Vec::new(),
        surface: Some(patch),
    })
}

type SolveCache = Mutex<HashMap<String, Result<SurfacePatch, LiftError>>>;

/// Shell solves are deterministic and comparatively slow, so results are memoized
/// process-wide. The conjugate surface depends only on the faces the loop visits.
fn cached_shell_solve(skel: &SkeletonSpec, kind: LiftKind, cfg: &ShellConfig) -> Result<SurfacePatch, LiftError> {
    static CACHE: OnceLock<SolveCache> = OnceLock::new();
    let key = match kind {
        LiftKind::UniformTPMSShellViaConjugation => {
            format!("{kind:?}|{:?}|{:?}|{cfg:?}", skel.polytope, conjugate::segment_faces(skel))
        }
        _ => {
            let weights: Vec<&[f64]> = skel.nodes.iter().map(|n| n.weights.values()).collect();
            format!("{kind:?}|{:?}|{weights:?}|{:?}|{cfg:?}", skel.polytope, skel.loop_cycle())
        }
    };
    let cache = CACHE.get_or_init(Default::default);
    if let Some(hit) = cache.lock().expect("solve cache poisoned").get(&key) {
        return hit.clone();
    }
    let result = match kind {
        LiftKind::UniformDirectShell => solve_direct_shell(skel, cfg),
        LiftKind::UniformTPMSShellViaMixedMinimal => solve_tpms_mixed(skel, cfg),
        _ => solve_tpms_conjugate(skel, cfg),
    };
    cache.lock().expect("solve cache poisoned").insert(key, result.clone());
    result
}

/// Lift with any procedure; `thickness` is a profile only for varying beams.
pub fn lift(
    skel: &SkeletonSpec,
    kind: LiftKind,
    thickness: Thickness,
    cfg: &ShellConfig,
) -> Result<LiftedSkeleton, LiftError> {
    match (kind, thickness) {
        (LiftKind::SpatiallyVaryingBeams, Thickness::Profile(p)) => lift_varying_beams(skel, p),
        (LiftKind::SpatiallyVaryingBeams, Thickness::Uniform(d)) => {
            check_positive(d)?;
            lift_varying_beams(skel, ThicknessProfile::constant(d)?)
        }
        (k, Thickness::Profile(p)) => lift(skel, k, Thickness::Uniform(p.mean_diameter()), cfg),
        (LiftKind::UniformBeams, Thickness::Uniform(d)) => lift_uniform_beams(skel, d),
        (LiftKind::Spheres, Thickness::Uniform(r)) => lift_spheres(skel, r),
        (k, Thickness::Uniform(t)) => lift_shell(skel, k, t, cfg),
    }
}

/// World-space primitives of one lifted skeleton.
#[derive(Clone, Debug)]
pub enum Primitives {
    /// Cone-capsule chains: (a, b, radius at a, radius at b).
    Cones(Vec<(Vec3, Vec3, f64, f64)>),
    Spheres(Vec<(Vec3, f64)>),
    Shell { bvh: TriangleBvh, half_thickness: f64 },
}

impl Primitives {
    pub fn eval(&self, p: &Vec3) -> f64 {
        match self {
            Primitives::Cones(cs) => cs
                .iter()
                .map(|(a, b, ra, rb)| round_cone_distance(p, a, b, *ra, *rb))
                .fold(f64::INFINITY, f64::min),
            Primitives::Spheres(ss) => {
                ss.iter().map(|(c, r)| (p - c).norm() - r).fold(f64::INFINITY, f64::min)
            }
            Primitives::Shell { bvh, half_thickness } => bvh.distance(p) - half_thickness,
        }
    }
}

/// Insert the profile breakpoints into a polyline; returns points and their normalized arc positions.
fn with_breakpoints(pts: &[Vec3], prof: &ThicknessProfile) -> (Vec<Vec3>, Vec<f64>) {
    let mut acc = vec![0.0; pts.len()];
    for i in 1..pts.len() {
        acc[i] = acc[i - 1] + (pts[i] - pts[i - 1]).norm();
    }
    let total = acc[pts.len() - 1].max(1e-300);
    let mut out = vec![pts[0]];
    let mut ts = vec![0.0];
    for i in 1..pts.len() {
        let (t0, t1) = (acc[i - 1] / total, acc[i] / total);
        for &(tb, _) in &prof.samples {
            if tb > t0 + 1e-12 && tb < t1 - 1e-12 {
                out.push(pts[i - 1] + (pts[i] - pts[i - 1]) * ((tb - t0) / (t1 - t0)));
                ts.push(tb);
            }
        }
        out.push(pts[i]);
        ts.push(t1);
    }
    (out, ts)
}

impl LiftedSkeleton {
    /// Instantiate the recipe with `map` taking corner weights to world space.
    pub fn primitives(&self, map: &dyn Fn(&CornerWeights) -> Vec3) -> Primitives {
        match self.kind {
            LiftKind::Spheres => {
                let r = self.thickness.scalar();
                Primitives::Spheres(self.skeleton.nodes.iter().map(|v| (map(&v.weights), r)).collect())
            }
            LiftKind::UniformBeams | LiftKind::SpatiallyVaryingBeams => {
                let mut cones = Vec::new();
                for cl in &self.centerlines {
                    let mut pts: Vec<Vec3> = cl.points.iter().map(map).collect();
                    let radius: Vec<f64> = match &self.thickness {
                        Thickness::Uniform(d) => vec![d / 2.0; pts.len()],
                        Thickness::Profile(prof) => {
                            let (p, s) = with_breakpoints(&pts, prof);
                            pts = p;
                            s.iter().map(|&t| prof.diameter_at(t) / 2.0).collect()
                        }
                    };
                    for i in 1..pts.len() {
                        cones.push((pts[i - 1], pts[i], radius[i - 1], radius[i]));
                    }
                }
                Primitives::Cones(cones)
            }
            _ => {
                let patch = self.surface.as_ref().expect("shell lifts carry a surface");
                let world: Vec<Vec3> = patch.vertices.iter().map(map).collect();
                let tris = patch.triangles.iter().map(|t| [world[t[0]], world[t[1]], world[t[2]]]).collect();
                Primitives::Shell { bvh: TriangleBvh::new(tris), half_thickness: self.thickness.scalar() / 2.0 }
            }
        }
    }
}

#[cfg(test)]
mod shell_tests;
