use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::AugmentError;
use crate::assembly::{Leaf, StructureIR, Tile};
use crate::cp_core::{
    build_skeleton, check_lift_compat, make_path, make_vertex, EntityCategory, LiftKind, SkeletonItem, SkeletonSpec,
    VertexSpec,
};
use crate::lifting::{lift, LiftedSkeleton, ShellConfig, Thickness, ThicknessProfile};

/// Upper clamp for resampled thicknesses, in unit-cell lengths.
pub const MAX_THICKNESS: f64 = 0.25;
const THICKNESS_SCALE: (f64, f64) = (0.5, 1.5);
const VERTEX_RETRIES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MutationConfig {
    pub p_swap_pathkind: f64,
    pub p_swap_lift: f64,
    pub p_vertex: f64,
    pub p_thickness: f64,
    pub seed: u64,
}

impl Default for MutationConfig {
    fn default() -> Self {
        MutationConfig { p_swap_pathkind: 0.7, p_swap_lift: 0.7, p_vertex: 0.9, p_thickness: 0.98, seed: 0 }
    }
}

impl MutationConfig {
    pub fn with_seed(seed: u64) -> Self {
        MutationConfig { seed, ..Default::default() }
    }

    fn probabilities(&self) -> [(MutationAxis, f64); 4] {
        [
            (MutationAxis::PathKind, self.p_swap_pathkind),
            (MutationAxis::LiftKind, self.p_swap_lift),
            (MutationAxis::Vertex, self.p_vertex),
            (MutationAxis::Thickness, self.p_thickness),
        ]
    }

    fn validate(&self) -> Result<(), AugmentError> {
        for (axis, p) in self.probabilities() {
            if !(0.0..=1.0).contains(&p) {
                return Err(AugmentError::InvalidProbability { name: axis.config_key(), value: p });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutationAxis {
    PathKind,
    LiftKind,
    Vertex,
    Thickness,
}

impl MutationAxis {
    pub const ALL: [MutationAxis; 4] =
        [MutationAxis::PathKind, MutationAxis::LiftKind, MutationAxis::Vertex, MutationAxis::Thickness];

    fn config_key(self) -> &'static str {
        match self {
            MutationAxis::PathKind => "p_swap_pathkind",
            MutationAxis::LiftKind => "p_swap_lift",
            MutationAxis::Vertex => "p_vertex",
            MutationAxis::Thickness => "p_thickness",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MutationRecord {
    pub axis: MutationAxis,
    /// `leaf{i}.lift{j}` optionally followed by `.path{k}` or `.node{k}`.
    pub site: String,
    pub old: String,
    pub new: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MutationTrace {
    pub seed: u64,
    pub enabled: Vec<MutationAxis>,
    pub applied: Vec<MutationRecord>,
}

/// Kinds a lifted skeleton may switch to: those its skeleton admits within the
/// same geometric family (beams, spheres, thin shells, minimal surfaces), minus
/// the current kind when there is an alternative.
pub fn lift_candidates(skel: &SkeletonSpec, current: LiftKind) -> Vec<LiftKind> {
    let family = |k: LiftKind| match k {
        LiftKind::UniformBeams | LiftKind::SpatiallyVaryingBeams => 0,
        LiftKind::Spheres => 1,
        LiftKind::UniformDirectShell => 2,
        LiftKind::UniformTPMSShellViaMixedMinimal | LiftKind::UniformTPMSShellViaConjugation => 3,
    };
    let compatible: Vec<LiftKind> = LiftKind::ALL
        .into_iter()
        .filter(|&k| family(k) == family(current) && check_lift_compat(skel, k).is_ok())
        .collect();
    let others: Vec<LiftKind> = compatible.iter().copied().filter(|&k| k != current).collect();
    if others.is_empty() {
        compatible
    } else {
        others
    }
}

/// Pending edits for one lifted skeleton.
#[derive(Clone, Debug, Default)]
struct Edits {
    flip_paths: Vec<usize>,
    new_kind: Option<LiftKind>,
    moved: Vec<usize>,
    new_thickness: Option<Thickness>,
}

struct Plan {
    trace: MutationTrace,
    /// Edits per leaf, per lifted skeleton.
    edits: Vec<Vec<Edits>>,
    /// Record indices of vertex moves, so failed rebuilds can be resampled or dropped.
    vertex_records: Vec<(usize, usize, usize, usize)>,
}

fn fmt_t(t: &[f64]) -> String {
    let parts: Vec<String> = t.iter().map(|x| format!("{x:?}")).collect();
    format!("[{}]", parts.join(", "))
}

fn current_t(v: &VertexSpec) -> Vec<f64> {
    match (&v.t, v.entity.category) {
        (Some(t), _) => t.clone(),
        (None, EntityCategory::Edge) => vec![0.5],
        (None, EntityCategory::Face) if v.entity.corners().len() == 3 => vec![1.0 / 3.0, 1.0 / 3.0],
        (None, _) => vec![0.5, 0.5],
    }
}

fn sample_t(v: &VertexSpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
    match v.entity.category {
        EntityCategory::Edge => vec![rng.gen::<f64>()],
        EntityCategory::Face if v.entity.corners().len() == 3 => {
            let (u, w) = (rng.gen::<f64>(), rng.gen::<f64>());
            if u + w > 1.0 {
                vec![1.0 - u, 1.0 - w]
            } else {
                vec![u, w]
            }
        }
        _ => vec![rng.gen::<f64>(), rng.gen::<f64>()],
    }
}

fn describe_thickness(t: &Thickness) -> String {
    match t {
        Thickness::Uniform(x) => format!("{x:?}"),
        Thickness::Profile(p) => {
            let parts: Vec<String> = p.samples.iter().map(|(t, d)| format!("[{t:?}, {d:?}]")).collect();
            format!("[{}]", parts.join(", "))
        }
    }
}

fn resample_thickness(t: &Thickness, rng: &mut ChaCha8Rng) -> Thickness {
    let mut scale = |x: f64| (x * rng.gen_range(THICKNESS_SCALE.0..=THICKNESS_SCALE.1)).min(MAX_THICKNESS);
    match t {
        Thickness::Uniform(x) => Thickness::Uniform(scale(*x)),
        Thickness::Profile(p) => {
            Thickness::Profile(ThicknessProfile { samples: p.samples.iter().map(|&(s, d)| (s, scale(d))).collect() })
        }
    }
}

fn draw(ir: &StructureIR, cfg: &MutationConfig, rng: &mut ChaCha8Rng) -> Plan {
    let enabled: Vec<MutationAxis> =
        cfg.probabilities().into_iter().filter(|&(_, p)| rng.gen::<f64>() < p).map(|(a, _)| a).collect();
    let on = |a: MutationAxis| enabled.contains(&a);
    let leaves = ir.leaves();
    let mut edits: Vec<Vec<Edits>> = leaves.iter().map(|l| vec![Edits::default(); l.tile.lifted.len()]).collect();
    let mut applied = Vec::new();
    let mut vertex_records = Vec::new();
    let site = |i: usize, j: usize| format!("leaf{i}.lift{j}");

    if on(MutationAxis::PathKind) {
        for (i, leaf) in leaves.iter().enumerate() {
            for (j, l) in leaf.tile.lifted.iter().enumerate() {
                for (k, item) in l.skeleton.items.iter().enumerate() {
                    let SkeletonItem::Path(p) = item else { continue };
                    if rng.gen::<f64>() < cfg.p_swap_pathkind {
                        edits[i][j].flip_paths.push(k);
                        let name = |smooth: bool| if smooth { "Curve" } else { "Polyline" };
                        applied.push(MutationRecord {
                            axis: MutationAxis::PathKind,
                            site: format!("{}.path{k}", site(i, j)),
                            old: name(p.smooth).into(),
                            new: name(!p.smooth).into(),
                        });
                    }
                }
            }
        }
    }
    if on(MutationAxis::LiftKind) {
        for (i, leaf) in leaves.iter().enumerate() {
            for (j, l) in leaf.tile.lifted.iter().enumerate() {
                if rng.gen::<f64>() < cfg.p_swap_lift {
                    let options = lift_candidates(&l.skeleton, l.kind);
                    let pick = options[rng.gen_range(0..options.len())];
                    if pick != l.kind {
                        edits[i][j].new_kind = Some(pick);
                        applied.push(MutationRecord {
                            axis: MutationAxis::LiftKind,
                            site: site(i, j),
                            old: l.kind.name().into(),
                            new: pick.name().into(),
                        });
                    }
                }
            }
        }
    }
    if on(MutationAxis::Vertex) {
        for (i, leaf) in leaves.iter().enumerate() {
            for (j, l) in leaf.tile.lifted.iter().enumerate() {
                for (n, v) in l.skeleton.nodes.iter().enumerate() {
                    if v.entity.category == EntityCategory::Corner {
                        continue;
                    }
                    if rng.gen::<f64>() < cfg.p_vertex {
                        let t = sample_t(v, rng);
                        edits[i][j].moved.push(n);
                        vertex_records.push((applied.len(), i, j, n));
                        applied.push(MutationRecord {
                            axis: MutationAxis::Vertex,
                            site: format!("{}.node{n}", site(i, j)),
                            old: fmt_t(&current_t(v)),
                            new: fmt_t(&t),
                        });
                    }
                }
            }
        }
    }
    if on(MutationAxis::Thickness) {
        for (i, leaf) in leaves.iter().enumerate() {
            for (j, l) in leaf.tile.lifted.iter().enumerate() {
                if rng.gen::<f64>() < cfg.p_thickness {
                    let t = resample_thickness(&l.thickness, rng);
                    applied.push(MutationRecord {
                        axis: MutationAxis::Thickness,
                        site: site(i, j),
                        old: describe_thickness(&l.thickness),
                        new: describe_thickness(&t),
                    });
                    edits[i][j].new_thickness = Some(t);
                }
            }
        }
    }
    Plan { trace: MutationTrace { seed: cfg.seed, enabled, applied }, edits, vertex_records }
}

/// The gate and site draws of a mutation without rebuilding any geometry.
pub fn plan_mutation(ir: &StructureIR, cfg: &MutationConfig) -> Result<MutationTrace, AugmentError> {
    cfg.validate()?;
    Ok(draw(ir, cfg, &mut ChaCha8Rng::seed_from_u64(cfg.seed)).trace)
}

fn parse_t(text: &str) -> Vec<f64> {
    text.trim_matches(['[', ']']).split(',').map(|s| s.trim().parse().expect("formatted by fmt_t")).collect()
}

fn rebuild_lifted(
    l: &LiftedSkeleton,
    e: &Edits,
    moves: &[(usize, Vec<f64>)],
    cfg: &ShellConfig,
) -> Result<LiftedSkeleton, String> {
    let mut moved_nodes: Vec<(usize, VertexSpec)> = Vec::new();
    for (n, t) in moves {
        let v = make_vertex(l.skeleton.nodes[*n].entity, Some(t)).map_err(|e| e.to_string())?;
        moved_nodes.push((*n, v));
    }
    let replace = |v: &VertexSpec| -> VertexSpec {
        l.skeleton
            .nodes
            .iter()
            .position(|n| n.weights.same_point(&v.weights))
            .and_then(|idx| moved_nodes.iter().find(|(n, _)| *n == idx))
            .map_or_else(|| v.clone(), |(_, nv)| nv.clone())
    };
    let mut items = Vec::with_capacity(l.skeleton.items.len());
    for (k, item) in l.skeleton.items.iter().enumerate() {
        items.push(match item {
            SkeletonItem::Vertex(v) => SkeletonItem::Vertex(replace(v)),
            SkeletonItem::Path(p) => {
                let smooth = p.smooth ^ e.flip_paths.contains(&k);
                let path = make_path(p.vertices.iter().map(replace).collect(), smooth).map_err(|e| e.to_string())?;
                SkeletonItem::Path(path)
            }
        });
    }
    let skel = build_skeleton(items).map_err(|e| e.to_string())?;
    if skel.topology != l.skeleton.topology {
        return Err("vertex moves changed the skeleton topology".into());
    }
    let kind = e.new_kind.unwrap_or(l.kind);
    let thickness = e.new_thickness.clone().unwrap_or_else(|| l.thickness.clone());
    lift(&skel, kind, thickness, cfg).map_err(|e| e.to_string())
}

fn rebuild(ir: &StructureIR, leaves: &mut std::vec::IntoIter<Leaf>) -> Result<StructureIR, AugmentError> {
    match ir {
        StructureIR::Leaf(_) => {
            let leaf = leaves.next().expect("one rebuilt leaf per leaf");
            let tile = Tile::new(leaf.tile.lifted, leaf.tile.embedding).map_err(|e| AugmentError::Rebuild(e.to_string()))?;
            StructureIR::new(tile, leaf.pattern).map_err(|e| AugmentError::Rebuild(e.to_string()))
        }
        StructureIR::Csg { op, left, right } => {
            let l = rebuild(left, leaves)?;
            let r = rebuild(right, leaves)?;
            Ok(StructureIR::csg(*op, l, r))
        }
    }
}

/// Seeded mutation along the four axes with two-level gating.
///
/// Vertex moves that break the skeleton or its lifting are resampled a few
/// times and then dropped, so every returned structure type-checks.
pub fn mutate(ir: &StructureIR, cfg: &MutationConfig) -> Result<(StructureIR, MutationTrace), AugmentError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut plan = draw(ir, cfg, &mut rng);
    let shell = ShellConfig::default();
    let mut dropped = Vec::new();
    let mut rebuilt_leaves = Vec::new();
    for (i, leaf) in ir.leaves().into_iter().enumerate() {
        let mut lifted = Vec::with_capacity(leaf.tile.lifted.len());
        for (j, l) in leaf.tile.lifted.iter().enumerate() {
            let records: Vec<(usize, usize)> = plan
                .vertex_records
                .iter()
                .filter(|r| r.1 == i && r.2 == j)
                .map(|r| (r.0, r.3))
                .collect();
            let mut moves: Vec<(usize, Vec<f64>)> =
                records.iter().map(|&(rec, n)| (n, parse_t(&plan.trace.applied[rec].new))).collect();
            let mut attempt = 0;
            let result = loop {
                match rebuild_lifted(l, &plan.edits[i][j], &moves, &shell) {
                    Ok(x) => break Ok(x),
                    Err(_) if !moves.is_empty() && attempt < VERTEX_RETRIES => {
                        attempt += 1;
                        for (n, t) in moves.iter_mut() {
                            *t = sample_t(&l.skeleton.nodes[*n], &mut rng);
                        }
                    }
                    Err(_) if !moves.is_empty() => {
                        moves.clear();
                        dropped.extend(records.iter().map(|r| r.0));
                    }
                    Err(e) => break Err(AugmentError::Rebuild(e)),
                }
            }?;
            for (&(rec, _), (_, t)) in records.iter().zip(&moves) {
                plan.trace.applied[rec].new = fmt_t(t);
            }
            lifted.push(result);
        }
        rebuilt_leaves.push(Leaf {
            tile: Tile { lifted, embedding: leaf.tile.embedding.clone() },
            pattern: leaf.pattern.clone(),
            transforms: leaf.transforms.clone(),
        });
    }
    let mut index = 0;
    plan.trace.applied.retain(|_| {
        index += 1;
        !dropped.contains(&(index - 1))
    });
    if plan.trace.applied.is_empty() {
        return Err(AugmentError::NoEligibleSites { enabled: plan.trace.enabled });
    }
    let out = rebuild(ir, &mut rebuilt_leaves.into_iter())?;
    Ok((out, plan.trace))
}
