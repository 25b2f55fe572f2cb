//! Pattern operators and their expansion into explicit isometries.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::embedding::Embedding;
use super::AssemblyError;
use crate::cp_core::{EntityCategory, EntityRef, PolytopeKind, Vec3};

/// Tolerance for "inside the unit cell" checks on transformed tiles.
pub const CELL_TOL: f64 = 1e-9;

/// Rigid map `p -> r p + t` with orthogonal `r`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Isometry {
    pub r: Matrix3<f64>,
    pub t: Vec3,
}

impl Isometry {
    pub fn identity() -> Self {
        Isometry { r: Matrix3::identity(), t: Vec3::zeros() }
    }

    pub fn apply(&self, p: &Vec3) -> Vec3 {
        self.r * p + self.t
    }

    pub fn inverse(&self) -> Self {
        let rt = self.r.transpose();
        Isometry { r: rt, t: -(rt * self.t) }
    }

    /// `self ∘ other`
    pub fn compose(&self, other: &Isometry) -> Self {
        Isometry { r: self.r * other.r, t: self.r * other.t + self.t }
    }

    pub fn approx_eq(&self, other: &Isometry, tol: f64) -> bool {
        (self.r - other.r).amax() <= tol && (self.t - other.t).amax() <= tol
    }

    pub fn is_identity(&self) -> bool {
        self.approx_eq(&Isometry::identity(), 1e-12)
    }

    pub fn determinant(&self) -> f64 {
        self.r.determinant()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TransformSet {
    pub isometries: Vec<Isometry>,
}

impl TransformSet {
    pub fn len(&self) -> usize {
        self.isometries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.isometries.is_empty()
    }

    fn push_unique(&mut self, iso: Isometry) {
        if !self.isometries.iter().any(|x| x.approx_eq(&iso, 1e-12)) {
            self.isometries.push(iso);
        }
    }
}

/// One step of a custom pattern chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum CustomKind {
    Mirror(EntityRef),
    Rotate180(Vec<EntityRef>),
    Translate(EntityRef, EntityRef),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CustomOp {
    pub kind: CustomKind,
    pub do_copy: bool,
    pub inner: Option<Box<CustomOp>>,
}

impl CustomOp {
    pub fn new(kind: CustomKind, do_copy: bool, inner: Option<CustomOp>) -> Self {
        CustomOp { kind, do_copy, inner: inner.map(Box::new) }
    }

    /// Program spelling of the chain.
    pub fn describe(&self) -> String {
        let head = match &self.kind {
            CustomKind::Mirror(f) => format!("Mirror({}", f.path()),
            CustomKind::Rotate180(es) => {
                let list: Vec<String> = es.iter().map(|e| e.path()).collect();
                format!("Rotate180([{}]", list.join(", "))
            }
            CustomKind::Translate(a, b) => format!("Translate({}, {}", a.path(), b.path()),
        };
        let copy = if self.do_copy { "True" } else { "False" };
        match &self.inner {
            Some(inner) => format!("{head}, {copy}, {})", inner.describe()),
            None => format!("{head}, {copy})"),
        }
    }

    fn entities(&self) -> Vec<EntityRef> {
        match &self.kind {
            CustomKind::Mirror(f) => vec![*f],
            CustomKind::Rotate180(es) => es.clone(),
            CustomKind::Translate(a, b) => vec![*a, *b],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PatternOp {
    Identity,
    CuboidFullMirror,
    TetFullMirror,
    TriPrismFullMirror,
    Custom(CustomOp),
}

impl PatternOp {
    pub fn describe(&self) -> String {
        match self {
            PatternOp::Identity => "Identity()".into(),
            PatternOp::CuboidFullMirror => "CuboidFullMirror()".into(),
            PatternOp::TetFullMirror => "TetFullMirror()".into(),
            PatternOp::TriPrismFullMirror => "TriPrismFullMirror()".into(),
            PatternOp::Custom(op) => format!("Custom({})", op.describe()),
        }
    }

    pub fn is_full_mirror(&self) -> bool {
        matches!(self, PatternOp::CuboidFullMirror | PatternOp::TetFullMirror | PatternOp::TriPrismFullMirror)
    }
}

/// Constant-time map of a cell point into the tile's fundamental region.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Fold {
    /// Identity pattern: the point is used as is.
    None,
    /// Per-axis triangle wave about the box minimum with half-period `size`.
    Cuboid { min: Vec3, size: Vec3 },
    /// Fold into the cube of side `s`, then sort into `s >= x >= y >= z >= 0`.
    Tet { s: f64 },
    /// Fold into the cube of side `s`, then reflect across `x + z = s`.
    TriPrism { s: f64 },
    /// No fast path: enumerate the transform set.
    Enumerate,
}

fn tri_wave(x: f64, min: f64, a: f64) -> f64 {
    let u = (x - min).rem_euclid(2.0 * a);
    min + if u > a { 2.0 * a - u } else { u }
}

impl Fold {
    pub fn apply(&self, p: &Vec3) -> Vec3 {
        match *self {
            Fold::None | Fold::Enumerate => *p,
            Fold::Cuboid { min, size } => {
                Vec3::new(tri_wave(p.x, min.x, size.x), tri_wave(p.y, min.y, size.y), tri_wave(p.z, min.z, size.z))
            }
            Fold::Tet { s } => {
                let mut v = [tri_wave(p.x, 0.0, s), tri_wave(p.y, 0.0, s), tri_wave(p.z, 0.0, s)];
                v.sort_by(|a, b| b.total_cmp(a));
                Vec3::new(v[0], v[1], v[2])
            }
            Fold::TriPrism { s } => {
                let (x, y, z) = (tri_wave(p.x, 0.0, s), tri_wave(p.y, 0.0, s), tri_wave(p.z, 0.0, s));
                if x + z > s {
                    Vec3::new(s - z, y, s - x)
                } else {
                    Vec3::new(x, y, z)
                }
            }
        }
    }
}

pub fn fold_for(pattern: &PatternOp, embedding: &Embedding) -> Fold {
    match pattern {
        PatternOp::Identity => Fold::None,
        PatternOp::CuboidFullMirror => Fold::Cuboid { min: embedding.bbox_min(), size: embedding.size() },
        PatternOp::TetFullMirror => Fold::Tet { s: embedding.size().x },
        PatternOp::TriPrismFullMirror => Fold::TriPrism { s: embedding.size().x },
        PatternOp::Custom(_) => Fold::Enumerate,
    }
}

fn cells(n: usize) -> impl Iterator<Item = [usize; 3]> {
    (0..n).flat_map(move |i| (0..n).flat_map(move |j| (0..n).map(move |k| [i, j, k])))
}

fn cell_count(a: f64) -> usize {
    (1.0 / a).round() as usize
}

/// Cube `[0,s]^3` placed into cell `c` by reflecting odd cells.
fn cell_map(c: [usize; 3], s: f64) -> Isometry {
    let mut r = Matrix3::zeros();
    let mut t = Vec3::zeros();
    for i in 0..3 {
        if c[i] % 2 == 1 {
            r[(i, i)] = -1.0;
            t[i] = (c[i] + 1) as f64 * s;
        } else {
            r[(i, i)] = 1.0;
            t[i] = c[i] as f64 * s;
        }
    }
    Isometry { r, t }
}

fn require_kind(embedding: &Embedding, kind: PolytopeKind, pattern: &PatternOp) -> Result<(), AssemblyError> {
    if embedding.polytope == kind {
        Ok(())
    } else {
        Err(AssemblyError::IncompatiblePattern(format!(
            "{} needs a {} tile, got {}",
            pattern.describe(),
            kind.name(),
            embedding.polytope.name()
        )))
    }
}

fn cuboid_full_mirror(embedding: &Embedding) -> Result<TransformSet, AssemblyError> {
    let min = embedding.bbox_min();
    let a = embedding.size();
    let mut offset = [0usize; 3];
    let mut n = [0usize; 3];
    for i in 0..3 {
        let q = min[i] / a[i];
        if (q - q.round()).abs() > 1e-9 {
            return Err(AssemblyError::IncompatiblePattern(format!(
                "cuboid minimum {} is not aligned to its side {} along axis {i}",
                min[i], a[i]
            )));
        }
        offset[i] = q.round() as usize;
        n[i] = cell_count(a[i]);
    }
    let mut out = TransformSet::default();
    for ci in 0..n[0] {
        for cj in 0..n[1] {
            for ck in 0..n[2] {
                let c = [ci, cj, ck];
                let mut r = Matrix3::zeros();
                let mut t = Vec3::zeros();
                for i in 0..3 {
                    let base = c[i] as f64 * a[i];
                    if (c[i] + offset[i]) % 2 == 1 {
                        r[(i, i)] = -1.0;
                        t[i] = base + a[i] + min[i];
                    } else {
                        r[(i, i)] = 1.0;
                        t[i] = base - min[i];
                    }
                }
                out.isometries.push(Isometry { r, t });
            }
        }
    }
    Ok(out)
}

fn permutation(perm: [usize; 3]) -> Matrix3<f64> {
    let mut m = Matrix3::zeros();
    for (row, &col) in perm.iter().enumerate() {
        m[(row, col)] = 1.0;
    }
    m
}

const PERMUTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

fn simplex_full_mirror(embedding: &Embedding, in_cube: &[Isometry]) -> Result<TransformSet, AssemblyError> {
    if embedding.bbox_min().amax() > 1e-12 {
        return Err(AssemblyError::IncompatiblePattern("simplex tiles must be anchored at the origin".into()));
    }
    let s = embedding.size().x;
    let mut out = TransformSet::default();
    for c in cells(cell_count(s)) {
        let place = cell_map(c, s);
        for g in in_cube {
            out.isometries.push(place.compose(g));
        }
    }
    Ok(out)
}

fn custom_generator(op: &CustomOp, embedding: &Embedding) -> Result<Isometry, AssemblyError> {
    for e in op.entities() {
        if e.polytope != embedding.polytope {
            return Err(AssemblyError::IncompatiblePattern(format!(
                "pattern entity {} does not belong to the tile's {}",
                e.path(),
                embedding.polytope.name()
            )));
        }
    }
    match &op.kind {
        CustomKind::Mirror(face) => {
            if face.category != EntityCategory::Face {
                return Err(AssemblyError::IncompatiblePattern(format!("Mirror needs a face, got {}", face.path())));
            }
            let cs = embedding.entity_corners(face);
            let n = (cs[1] - cs[0]).cross(&(cs[2] - cs[0])).normalize();
            let c = embedding.entity_point(face);
            let r = Matrix3::identity() - 2.0 * n * n.transpose();
            Ok(Isometry { r, t: 2.0 * n.dot(&c) * n })
        }
        CustomKind::Rotate180(es) => {
            let (a, b) = match es.as_slice() {
                [e] if e.category == EntityCategory::Edge => {
                    let cs = embedding.entity_corners(e);
                    (cs[0], cs[1])
                }
                [e] => {
                    return Err(AssemblyError::IncompatiblePattern(format!(
                        "a single Rotate180 entity must be an edge, got {}",
                        e.path()
                    )))
                }
                [e0, e1] => (embedding.entity_point(e0), embedding.entity_point(e1)),
                _ => {
                    return Err(AssemblyError::IncompatiblePattern(
                        "Rotate180 takes one edge or two entities".into(),
                    ))
                }
            };
            let axis = b - a;
            if axis.norm() < 1e-12 {
                return Err(AssemblyError::IncompatiblePattern("Rotate180 axis is degenerate".into()));
            }
            let d = axis.normalize();
            let r = 2.0 * d * d.transpose() - Matrix3::identity();
            Ok(Isometry { r, t: a - r * a })
        }
        CustomKind::Translate(from, to) => {
            if from.category != EntityCategory::Face || to.category != EntityCategory::Face {
                return Err(AssemblyError::IncompatiblePattern("Translate is defined between faces only".into()));
            }
            Ok(Isometry { r: Matrix3::identity(), t: embedding.entity_point(to) - embedding.entity_point(from) })
        }
    }
}

/// Apply the chain outermost first; each step copies or maps the current set.
fn apply_custom(op: &CustomOp, embedding: &Embedding, set: TransformSet) -> Result<TransformSet, AssemblyError> {
    let g = custom_generator(op, embedding)?;
    let mut next = TransformSet::default();
    if op.do_copy {
        for t in &set.isometries {
            next.push_unique(*t);
        }
    }
    for t in &set.isometries {
        next.push_unique(g.compose(t));
    }
    match &op.inner {
        Some(inner) => apply_custom(inner, embedding, next),
        None => Ok(next),
    }
}

fn check_inside_cell(set: &TransformSet, embedding: &Embedding) -> Result<(), AssemblyError> {
    for (k, t) in set.isometries.iter().enumerate() {
        for p in &embedding.corner_positions {
            let q = t.apply(p);
            if q.iter().any(|&v| v < -CELL_TOL || v > 1.0 + CELL_TOL) {
                return Err(AssemblyError::IncompatiblePattern(format!(
                    "transform {k} moves the tile outside the unit cell (corner at [{:.6}, {:.6}, {:.6}])",
                    q.x, q.y, q.z
                )));
            }
        }
    }
    Ok(())
}

pub fn expand_pattern(pattern: &PatternOp, embedding: &Embedding) -> Result<TransformSet, AssemblyError> {
    let set = match pattern {
        PatternOp::Identity => TransformSet { isometries: vec![Isometry::identity()] },
        PatternOp::CuboidFullMirror => {
            require_kind(embedding, PolytopeKind::Cuboid, pattern)?;
            cuboid_full_mirror(embedding)?
        }
        PatternOp::TetFullMirror => {
            require_kind(embedding, PolytopeKind::Tet, pattern)?;
            let group: Vec<Isometry> =
                PERMUTATIONS.iter().map(|&p| Isometry { r: permutation(p), t: Vec3::zeros() }).collect();
            simplex_full_mirror(embedding, &group)?
        }
        PatternOp::TriPrismFullMirror => {
            require_kind(embedding, PolytopeKind::TriPrism, pattern)?;
            let s = embedding.size().x;
            let swap = Isometry {
                r: Matrix3::new(0.0, 0.0, -1.0, 0.0, 1.0, 0.0, -1.0, 0.0, 0.0),
                t: Vec3::new(s, 0.0, s),
            };
            simplex_full_mirror(embedding, &[Isometry::identity(), swap])?
        }
        PatternOp::Custom(op) => {
            if embedding.polytope != PolytopeKind::Cuboid {
                return Err(AssemblyError::UnsupportedCustomPolytope(embedding.polytope.name().to_string()));
            }
            apply_custom(op, embedding, TransformSet { isometries: vec![Isometry::identity()] })?
        }
    };
    check_inside_cell(&set, embedding)?;
    Ok(set)
}
