//! CP-relative vertices, paths and skeletons.

use serde::{Deserialize, Serialize};

use super::polytope::{EntityCategory, EntityRef, PolytopeKind, Vec3, MAX_CORNERS};
use super::CpError;

/// Two vertices are the same point when their weights agree to this tolerance.
pub const IDENTITY_TOL: f64 = 1e-9;
const SUPPORT_EPS: f64 = 1e-12;

/// Barycentric-style weights over the corners of a polytope.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CornerWeights {
    pub polytope: PolytopeKind,
    pub w: [f64; MAX_CORNERS],
}

impl CornerWeights {
    pub fn zero(polytope: PolytopeKind) -> Self {
        CornerWeights { polytope, w: [0.0; MAX_CORNERS] }
    }

    pub fn corner(polytope: PolytopeKind, c: usize) -> Self {
        let mut w = Self::zero(polytope);
        w.w[c] = 1.0;
        w
    }

    pub fn values(&self) -> &[f64] {
        &self.w[..self.polytope.num_corners()]
    }

    /// Canonical position (inside the unit bounding box).
    pub fn position(&self) -> Vec3 {
        self.values()
            .iter()
            .enumerate()
            .map(|(i, &w)| self.polytope.corner(i) * w)
            .sum()
    }

    pub fn support(&self) -> Vec<usize> {
        self.values()
            .iter()
            .enumerate()
            .filter(|(_, &w)| w.abs() > SUPPORT_EPS)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn same_point(&self, other: &CornerWeights) -> bool {
        self.polytope == other.polytope
            && self
                .values()
                .iter()
                .zip(other.values())
                .all(|(a, b)| (a - b).abs() <= IDENTITY_TOL)
    }

    /// Weights of a canonical point. Exact for points inside the polytope.
    pub fn from_position(polytope: PolytopeKind, p: &Vec3) -> Self {
        let mut out = Self::zero(polytope);
        match polytope {
            PolytopeKind::Cuboid => {
                for c in 0..8 {
                    let q = polytope.corner(c);
                    let f = |pi: f64, qi: f64| if qi > 0.5 { pi } else { 1.0 - pi };
                    out.w[c] = f(p.x, q.x) * f(p.y, q.y) * f(p.z, q.z);
                }
            }
            PolytopeKind::TriPrism => {
                // Triangle (x, z) barycentrics times linear weights in y.
                let tri = [1.0 - p.x - p.z, p.z, p.x];
                for (k, &b) in tri.iter().enumerate() {
                    out.w[k] = b * (1.0 - p.y);
                    out.w[k + 3] = b * p.y;
                }
            }
            PolytopeKind::Tet => {
                // BL=(0,0,0), BR=(1,0,0), BB=(1,1,0), TB=(1,1,1).
                out.w[1] = 1.0 - p.x;
                out.w[0] = p.x - p.y;
                out.w[3] = p.y - p.z;
                out.w[2] = p.z;
            }
        }
        out
    }
}

fn entities_containing(polytope: PolytopeKind, category: EntityCategory, support: &[usize]) -> Vec<usize> {
    (0..polytope.entity_count(category))
        .filter(|&i| {
            let cs = polytope.entity_corners(category, i);
            support.iter().all(|c| cs.contains(c))
        })
        .collect()
}

/// A vertex positioned relative to one polytope entity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexSpec {
    pub entity: EntityRef,
    pub t: Option<Vec<f64>>,
    pub weights: CornerWeights,
}

impl VertexSpec {
    pub fn polytope(&self) -> PolytopeKind {
        self.entity.polytope
    }

    pub fn position(&self) -> Vec3 {
        self.weights.position()
    }

    /// Faces whose corner set contains this vertex's support.
    pub fn faces(&self) -> Vec<usize> {
        entities_containing(self.polytope(), EntityCategory::Face, &self.weights.support())
    }

    pub fn edges(&self) -> Vec<usize> {
        entities_containing(self.polytope(), EntityCategory::Edge, &self.weights.support())
    }

    pub fn on_edge(&self) -> bool {
        !self.edges().is_empty()
    }
}

fn check_unit(t: f64) -> Result<(), CpError> {
    if (0.0..=1.0).contains(&t) && t.is_finite() {
        Ok(())
    } else {
        Err(CpError::InterpolantRange(t))
    }
}

/// Build a vertex on `entity`, interpolating with `t` (midpoint / centroid when omitted).
pub fn make_vertex(entity: EntityRef, t: Option<&[f64]>) -> Result<VertexSpec, CpError> {
    let polytope = entity.polytope;
    let corners = entity.corners();
    let mut w = CornerWeights::zero(polytope);
    let stored_t = match entity.category {
        EntityCategory::Corner => {
            w.w[corners[0]] = 1.0;
            None
        }
        EntityCategory::Edge => {
            let s = match t {
                None => 0.5,
                Some(v) if v.len() == 1 => v[0],
                Some(v) => return Err(CpError::InterpolantArity { expected: 1, got: v.len() }),
            };
            check_unit(s)?;
            w.w[corners[0]] = 1.0 - s;
            w.w[corners[1]] += s;
            t.map(|v| v.to_vec())
        }
        EntityCategory::Face => {
            let tri = corners.len() == 3;
            let (u, v) = match t {
                None if tri => (1.0 / 3.0, 1.0 / 3.0),
                None => (0.5, 0.5),
                Some(p) if p.len() == 2 => (p[0], p[1]),
                Some(p) => return Err(CpError::InterpolantArity { expected: 2, got: p.len() }),
            };
            check_unit(u)?;
            check_unit(v)?;
            if tri {
                if u + v > 1.0 + 1e-12 {
                    return Err(CpError::BarycentricOutOfSimplex(u + v));
                }
                w.w[corners[0]] = (1.0 - u - v).max(0.0);
                w.w[corners[1]] = u;
                w.w[corners[2]] = v;
            } else {
                w.w[corners[0]] = (1.0 - u) * (1.0 - v);
                w.w[corners[1]] = u * (1.0 - v);
                w.w[corners[2]] = u * v;
                w.w[corners[3]] = (1.0 - u) * v;
            }
            t.map(|v| v.to_vec())
        }
    };
    Ok(VertexSpec { entity, t: stored_t, weights: w })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Incidence {
    OnCpEdge,
    InCpFace,
    ThroughVolume,
}

fn classify_segment(a: &VertexSpec, b: &VertexSpec) -> Incidence {
    let mut support = a.weights.support();
    for c in b.weights.support() {
        if !support.contains(&c) {
            support.push(c);
        }
    }
    let p = a.polytope();
    if !entities_containing(p, EntityCategory::Edge, &support).is_empty() {
        Incidence::OnCpEdge
    } else if !entities_containing(p, EntityCategory::Face, &support).is_empty() {
        Incidence::InCpFace
    } else {
        Incidence::ThroughVolume
    }
}

/// Faces containing both endpoints of a segment.
pub(crate) fn shared_faces(a: &VertexSpec, b: &VertexSpec) -> Vec<usize> {
    let fb = b.faces();
    a.faces().into_iter().filter(|f| fb.contains(f)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    pub vertices: Vec<VertexSpec>,
    pub smooth: bool,
    pub closed: bool,
    pub segment_incidence: Vec<Incidence>,
}

impl PathSpec {
    pub fn polytope(&self) -> PolytopeKind {
        self.vertices[0].polytope()
    }

    /// Distinct vertices (the closing repeat dropped).
    pub fn distinct(&self) -> &[VertexSpec] {
        if self.closed {
            &self.vertices[..self.vertices.len() - 1]
        } else {
            &self.vertices
        }
    }
}

pub fn make_path(vertices: Vec<VertexSpec>, smooth: bool) -> Result<PathSpec, CpError> {
    if vertices.len() < 2 {
        return Err(CpError::TooShort);
    }
    let polytope = vertices[0].polytope();
    if vertices.iter().any(|v| v.polytope() != polytope) {
        return Err(CpError::MixedPolytopes);
    }
    let n = vertices.len();
    let closed = n > 2 && vertices[0].weights.same_point(&vertices[n - 1].weights);
    let distinct = if closed { n - 1 } else { n };
    for i in 0..distinct {
        for j in (i + 1)..distinct {
            if vertices[i].weights.same_point(&vertices[j].weights) {
                return Err(CpError::NotSimple(format!("vertex {j} repeats vertex {i}")));
            }
        }
    }
    if !closed && n > 1 && vertices[0].weights.same_point(&vertices[n - 1].weights) {
        return Err(CpError::NotSimple("degenerate two-vertex loop".into()));
    }
    if closed && distinct < 3 {
        return Err(CpError::NotSimple("a closed path needs at least 3 distinct vertices".into()));
    }
    let segment_incidence = vertices.windows(2).map(|w| classify_segment(&w[0], &w[1])).collect();
    Ok(PathSpec { vertices, smooth, closed, segment_incidence })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SkeletonItem {
    Vertex(VertexSpec),
    Path(PathSpec),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Topology {
    PointSet,
    OpenPath,
    ClosedLoop,
    /// Any vertex of degree > 2, or several disjoint components.
    Branched,
}

/// One step of an ordered closed loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LoopStep {
    pub node: usize,
    /// Whether the segment leaving this node came from a Curve.
    pub smooth: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkeletonSpec {
    pub polytope: PolytopeKind,
    pub items: Vec<SkeletonItem>,
    /// Distinct vertices after gluing weight-identical ones.
    pub nodes: Vec<VertexSpec>,
    /// Undirected segments between nodes with their smoothness flag.
    pub segments: Vec<(usize, usize, bool)>,
    pub components: Vec<Vec<usize>>,
    pub topology: Topology,
    /// Face indices touched by any vertex.
    pub face_touch: Vec<usize>,
}

impl SkeletonSpec {
    pub fn paths(&self) -> impl Iterator<Item = &PathSpec> {
        self.items.iter().filter_map(|i| match i {
            SkeletonItem::Path(p) => Some(p),
            SkeletonItem::Vertex(_) => None,
        })
    }

    pub fn face_names(&self) -> Vec<&'static str> {
        self.face_touch.iter().map(|&f| self.polytope.faces()[f].0).collect()
    }

    /// Ordered cycle for a closed-loop skeleton, following the first path's direction.
    pub fn loop_cycle(&self) -> Option<Vec<LoopStep>> {
        if self.topology != Topology::ClosedLoop {
            return None;
        }
        let (a0, b0, s0) = self.segments[0];
        let mut used = vec![false; self.segments.len()];
        used[0] = true;
        let mut steps = vec![LoopStep { node: a0, smooth: s0 }];
        let mut cur = b0;
        while cur != a0 {
            let (k, &(a, b, s)) = self
                .segments
                .iter()
                .enumerate()
                .find(|(k, seg)| !used[*k] && (seg.0 == cur || seg.1 == cur))?;
            used[k] = true;
            steps.push(LoopStep { node: cur, smooth: s });
            cur = if a == cur { b } else { a };
        }
        Some(steps)
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

pub fn build_skeleton(items: Vec<SkeletonItem>) -> Result<SkeletonSpec, CpError> {
    if items.is_empty() {
        return Err(CpError::Empty);
    }
    let all_vertices = items.iter().all(|i| matches!(i, SkeletonItem::Vertex(_)));
    let all_paths = items.iter().all(|i| matches!(i, SkeletonItem::Path(_)));
    if !all_vertices && !all_paths {
        return Err(CpError::MixedDimensions);
    }
    let polytope = match &items[0] {
        SkeletonItem::Vertex(v) => v.polytope(),
        SkeletonItem::Path(p) => p.polytope(),
    };
    let mut nodes: Vec<VertexSpec> = Vec::new();
    let node_of = |v: &VertexSpec, nodes: &mut Vec<VertexSpec>| -> Result<usize, CpError> {
        if v.polytope() != polytope {
            return Err(CpError::MixedPolytopes);
        }
        if let Some(i) = nodes.iter().position(|n| n.weights.same_point(&v.weights)) {
            Ok(i)
        } else {
            nodes.push(v.clone());
            Ok(nodes.len() - 1)
        }
    };
    let mut segments: Vec<(usize, usize, bool)> = Vec::new();
    for item in &items {
        match item {
            SkeletonItem::Vertex(v) => {
                node_of(v, &mut nodes)?;
            }
            SkeletonItem::Path(p) => {
                let ids: Vec<usize> =
                    p.vertices.iter().map(|v| node_of(v, &mut nodes)).collect::<Result<_, _>>()?;
                for w in ids.windows(2) {
                    let (a, b) = (w[0], w[1]);
                    if !segments.iter().any(|s| (s.0 == a && s.1 == b) || (s.0 == b && s.1 == a)) {
                        segments.push((a, b, p.smooth));
                    }
                }
            }
        }
    }
    let n = nodes.len();
    let mut parent: Vec<usize> = (0..n).collect();
    let mut degree = vec![0usize; n];
    for &(a, b, _) in &segments {
        degree[a] += 1;
        degree[b] += 1;
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        parent[ra] = rb;
    }
    let mut components: Vec<Vec<usize>> = Vec::new();
    let mut root_slot: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        match root_slot[r] {
            Some(k) => components[k].push(i),
            None => {
                root_slot[r] = Some(components.len());
                components.push(vec![i]);
            }
        }
    }
    let topology = if all_vertices {
        Topology::PointSet
    } else if degree.iter().any(|&d| d > 2) || components.len() > 1 {
        Topology::Branched
    } else if degree.iter().all(|&d| d == 2) {
        Topology::ClosedLoop
    } else {
        Topology::OpenPath
    };
    let mut face_touch: Vec<usize> = nodes.iter().flat_map(|v| v.faces()).collect();
    face_touch.sort_unstable();
    face_touch.dedup();
    Ok(SkeletonSpec { polytope, items, nodes, segments, components, topology, face_touch })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LiftKind {
    UniformBeams,
    SpatiallyVaryingBeams,
    Spheres,
    UniformDirectShell,
    UniformTPMSShellViaMixedMinimal,
    UniformTPMSShellViaConjugation,
}

impl LiftKind {
    pub const ALL: [LiftKind; 6] = [
        LiftKind::UniformBeams,
        LiftKind::SpatiallyVaryingBeams,
        LiftKind::Spheres,
        LiftKind::UniformDirectShell,
        LiftKind::UniformTPMSShellViaMixedMinimal,
        LiftKind::UniformTPMSShellViaConjugation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LiftKind::UniformBeams => "UniformBeams",
            LiftKind::SpatiallyVaryingBeams => "SpatiallyVaryingBeams",
            LiftKind::Spheres => "Spheres",
            LiftKind::UniformDirectShell => "UniformDirectShell",
            LiftKind::UniformTPMSShellViaMixedMinimal => "UniformTPMSShellViaMixedMinimal",
            LiftKind::UniformTPMSShellViaConjugation => "UniformTPMSShellViaConjugation",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        LiftKind::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn is_shell(self) -> bool {
        matches!(
            self,
            LiftKind::UniformDirectShell
                | LiftKind::UniformTPMSShellViaMixedMinimal
                | LiftKind::UniformTPMSShellViaConjugation
        )
    }
}

/// Check the skeleton requirements of a lifting procedure.
pub fn check_lift_compat(skel: &SkeletonSpec, kind: LiftKind) -> Result<(), CpError> {
    let fail = |rule: &str| {
        Err(CpError::IncompatibleLift { kind: kind.name().to_string(), rule: rule.to_string() })
    };
    match kind {
        LiftKind::UniformBeams | LiftKind::SpatiallyVaryingBeams => {
            if skel.topology == Topology::PointSet {
                return fail("the skeleton must not contain any standalone vertices");
            }
        }
        LiftKind::Spheres => {
            if skel.topology != Topology::PointSet {
                return fail("the skeleton must contain only standalone vertices");
            }
        }
        LiftKind::UniformDirectShell => {
            if skel.topology != Topology::ClosedLoop {
                return fail("the skeleton must form a single closed loop");
            }
        }
        LiftKind::UniformTPMSShellViaMixedMinimal | LiftKind::UniformTPMSShellViaConjugation => {
            if skel.topology != Topology::ClosedLoop {
                return fail("the skeleton must form a single closed loop");
            }
            if let Some(v) = skel.nodes.iter().find(|v| !v.on_edge()) {
                return fail(&format!("every vertex must lie on a CP edge ({} does not)", v.entity.path()));
            }
            let cycle = skel.loop_cycle().expect("closed loop has a cycle");
            for k in 0..cycle.len() {
                let a = &skel.nodes[cycle[k].node];
                let b = &skel.nodes[cycle[(k + 1) % cycle.len()].node];
                if shared_faces(a, b).is_empty() {
                    return fail("adjacent vertices must share a CP face");
                }
            }
            if kind == LiftKind::UniformTPMSShellViaConjugation {
                let nf = skel.polytope.num_faces();
                if skel.face_touch.len() < nf {
                    return fail("the loop must touch every face of the CP");
                }
                if skel.nodes.len() < nf {
                    return fail(&format!(
                        "the loop needs at least as many vertices as the CP has faces ({} < {nf})",
                        skel.nodes.len()
                    ));
                }
            }
        }
    }
    Ok(())
}
