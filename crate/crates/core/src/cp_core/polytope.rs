//! The three reference polytopes and their named entities.

use std::sync::OnceLock;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::CpError;

pub type Vec3 = Vector3<f64>;

/// Maximum corner count over all polytopes (the cuboid).
pub const MAX_CORNERS: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PolytopeKind {
    Cuboid,
    TriPrism,
    Tet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EntityCategory {
    Corner,
    Edge,
    Face,
}

impl EntityCategory {
    pub fn plural(self) -> &'static str {
        match self {
            EntityCategory::Corner => "corners",
            EntityCategory::Edge => "edges",
            EntityCategory::Face => "faces",
        }
    }

    /// Accepts `corners`/`corner`, `edges`/`edge`, `faces`/`face`.
    /// `interior(s)` is recognised so that callers can report it as unsupported.
    pub fn parse(name: &str) -> Result<Self, CpError> {
        match name.to_ascii_lowercase().as_str() {
            "corners" | "corner" => Ok(EntityCategory::Corner),
            "edges" | "edge" => Ok(EntityCategory::Edge),
            "faces" | "face" => Ok(EntityCategory::Face),
            "interior" | "interiors" => Err(CpError::NotImplemented("interior entities".into())),
            other => Err(CpError::UnknownCategory(other.to_string())),
        }
    }
}

const CUBOID_CORNERS: [&str; 8] = [
    "FRONT_BOTTOM_LEFT",
    "FRONT_BOTTOM_RIGHT",
    "FRONT_TOP_LEFT",
    "FRONT_TOP_RIGHT",
    "BACK_BOTTOM_LEFT",
    "BACK_BOTTOM_RIGHT",
    "BACK_TOP_LEFT",
    "BACK_TOP_RIGHT",
];
const CUBOID_POS: [[f64; 3]; 8] = [
    [0.0, 0.0, 0.0],
    [1.0, 0.0, 0.0],
    [0.0, 0.0, 1.0],
    [1.0, 0.0, 1.0],
    [0.0, 1.0, 0.0],
    [1.0, 1.0, 0.0],
    [0.0, 1.0, 1.0],
    [1.0, 1.0, 1.0],
];
const CUBOID_EDGES: [(&str, [usize; 2]); 12] = [
    ("FRONT_BOTTOM", [0, 1]),
    ("FRONT_LEFT", [0, 2]),
    ("FRONT_TOP", [2, 3]),
    ("FRONT_RIGHT", [1, 3]),
    ("BACK_BOTTOM", [4, 5]),
    ("BACK_LEFT", [4, 6]),
    ("BACK_TOP", [6, 7]),
    ("BACK_RIGHT", [5, 7]),
    ("BOTTOM_LEFT", [0, 4]),
    ("TOP_LEFT", [2, 6]),
    ("TOP_RIGHT", [3, 7]),
    ("BOTTOM_RIGHT", [1, 5]),
];
const CUBOID_FACES: [(&str, &[usize]); 6] = [
    ("FRONT", &[0, 1, 3, 2]),
    ("BACK", &[4, 5, 7, 6]),
    ("TOP", &[2, 3, 7, 6]),
    ("BOTTOM", &[0, 1, 5, 4]),
    ("LEFT", &[0, 2, 6, 4]),
    ("RIGHT", &[1, 3, 7, 5]),
];

const PRISM_CORNERS: [&str; 6] = [
    "FRONT_BOTTOM_LEFT",
    "FRONT_TOP",
    "FRONT_BOTTOM_RIGHT",
    "BACK_BOTTOM_LEFT",
    "BACK_TOP",
    "BACK_BOTTOM_RIGHT",
];
const PRISM_POS: [[f64; 3]; 6] = [
    [0.0, 0.0, 0.0],
    [0.0, 0.0, 1.0],
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 1.0, 1.0],
    [1.0, 1.0, 0.0],
];
const PRISM_EDGES: [(&str, [usize; 2]); 9] = [
    ("FRONT_LEFT", [0, 1]),
    ("FRONT_RIGHT", [1, 2]),
    ("FRONT_BOTTOM", [0, 2]),
    ("BACK_LEFT", [3, 4]),
    ("BACK_RIGHT", [4, 5]),
    ("BACK_BOTTOM", [3, 5]),
    ("BOTTOM_LEFT", [0, 3]),
    ("TOP", [1, 4]),
    ("BOTTOM_RIGHT", [2, 5]),
];
const PRISM_FACES: [(&str, &[usize]); 5] = [
    ("FRONT_TRI", &[0, 2, 1]),
    ("BACK_TRI", &[3, 5, 4]),
    ("LEFT_QUAD", &[0, 1, 4, 3]),
    ("RIGHT_QUAD", &[1, 2, 5, 4]),
    ("BOTTOM_QUAD", &[0, 2, 5, 3]),
];

const TET_CORNERS: [&str; 4] = ["BOTTOM_RIGHT", "BOTTOM_LEFT", "TOP_BACK", "BOTTOM_BACK"];
const TET_POS: [[f64; 3]; 4] = [
    [1.0, 0.0, 0.0],
    [0.0, 0.0, 0.0],
    [1.0, 1.0, 1.0],
    [1.0, 1.0, 0.0],
];
const TET_EDGES: [(&str, [usize; 2]); 6] = [
    ("BOTTOM_FRONT", [1, 0]),
    ("TOP_LEFT", [1, 2]),
    ("BACK", [3, 2]),
    ("BOTTOM_RIGHT", [0, 3]),
    ("TOP_RIGHT", [0, 2]),
    ("BOTTOM_LEFT", [1, 3]),
];
const TET_FACES: [(&str, &[usize]); 4] = [
    ("BOTTOM", &[0, 1, 3]),
    ("TOP", &[1, 0, 2]),
    ("RIGHT", &[0, 3, 2]),
    ("LEFT", &[1, 3, 2]),
];

impl PolytopeKind {
    pub const ALL: [PolytopeKind; 3] = [PolytopeKind::Cuboid, PolytopeKind::TriPrism, PolytopeKind::Tet];

    /// Name as written in programs.
    pub fn name(self) -> &'static str {
        match self {
            PolytopeKind::Cuboid => "cuboid",
            PolytopeKind::TriPrism => "triPrism",
            PolytopeKind::Tet => "tet",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        PolytopeKind::ALL.into_iter().find(|k| k.name() == name)
    }

    pub fn corner_names(self) -> &'static [&'static str] {
        match self {
            PolytopeKind::Cuboid => &CUBOID_CORNERS,
            PolytopeKind::TriPrism => &PRISM_CORNERS,
            PolytopeKind::Tet => &TET_CORNERS,
        }
    }

    fn corner_table(self) -> &'static [[f64; 3]] {
        match self {
            PolytopeKind::Cuboid => &CUBOID_POS,
            PolytopeKind::TriPrism => &PRISM_POS,
            PolytopeKind::Tet => &TET_POS,
        }
    }

    pub fn edges(self) -> &'static [(&'static str, [usize; 2])] {
        match self {
            PolytopeKind::Cuboid => &CUBOID_EDGES,
            PolytopeKind::TriPrism => &PRISM_EDGES,
            PolytopeKind::Tet => &TET_EDGES,
        }
    }

    pub fn faces(self) -> &'static [(&'static str, &'static [usize])] {
        match self {
            PolytopeKind::Cuboid => &CUBOID_FACES,
            PolytopeKind::TriPrism => &PRISM_FACES,
            PolytopeKind::Tet => &TET_FACES,
        }
    }

    pub fn num_corners(self) -> usize {
        self.corner_names().len()
    }

    pub fn num_faces(self) -> usize {
        self.faces().len()
    }

    /// Canonical corner position inside the unit bounding box.
    pub fn corner(self, i: usize) -> Vec3 {
        let p = self.corner_table()[i];
        Vec3::new(p[0], p[1], p[2])
    }

    pub fn entity_names(self, category: EntityCategory) -> Vec<&'static str> {
        match category {
            EntityCategory::Corner => self.corner_names().to_vec(),
            EntityCategory::Edge => self.edges().iter().map(|e| e.0).collect(),
            EntityCategory::Face => self.faces().iter().map(|f| f.0).collect(),
        }
    }

    pub fn entity_count(self, category: EntityCategory) -> usize {
        match category {
            EntityCategory::Corner => self.num_corners(),
            EntityCategory::Edge => self.edges().len(),
            EntityCategory::Face => self.num_faces(),
        }
    }

    /// Corner indices spanned by an entity.
    pub fn entity_corners(self, category: EntityCategory, index: usize) -> Vec<usize> {
        match category {
            EntityCategory::Corner => vec![index],
            EntityCategory::Edge => self.edges()[index].1.to_vec(),
            EntityCategory::Face => self.faces()[index].1.to_vec(),
        }
    }

    pub fn centroid(self) -> Vec3 {
        let n = self.num_corners();
        (0..n).map(|i| self.corner(i)).sum::<Vec3>() / n as f64
    }

    /// Outward unit normal and offset `d` of a face plane (`n·x = d`) in canonical coordinates.
    pub fn face_plane(self, face: usize) -> (Vec3, f64) {
        let cs = self.faces()[face].1;
        let a = self.corner(cs[0]);
        let b = self.corner(cs[1]);
        let c = self.corner(cs[2]);
        let mut n = (b - a).cross(&(c - a)).normalize();
        if n.dot(&(self.centroid() - a)) > 0.0 {
            n = -n;
        }
        (n, n.dot(&a))
    }

    /// All face planes, computed once per polytope.
    pub fn face_planes(self) -> &'static [(Vec3, f64)] {
        static PLANES: OnceLock<[Vec<(Vec3, f64)>; 3]> = OnceLock::new();
        let all = PLANES.get_or_init(|| {
            PolytopeKind::ALL.map(|k| (0..k.num_faces()).map(|f| k.face_plane(f)).collect())
        });
        &all[self as usize]
    }

    /// Signed distance-like value: max over faces of `n·p − d` (negative inside).
    pub fn inside_measure(self, p: &Vec3) -> f64 {
        self.face_planes().iter().map(|(n, d)| n.dot(p) - d).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Euclidean projection of a canonical point onto the solid polytope.
    pub fn project_inside(self, p: &Vec3) -> Vec3 {
        match self {
            PolytopeKind::Cuboid => p.map(|v| v.clamp(0.0, 1.0)),
            PolytopeKind::TriPrism => {
                let (x, z) = project_right_triangle(p.x, p.z);
                Vec3::new(x, p.y.clamp(0.0, 1.0), z)
            }
            PolytopeKind::Tet => {
                // Chamber {1 >= x >= y >= z >= 0}: isotonic regression then clamp.
                let v = isotonic_decreasing([p.x, p.y, p.z]);
                Vec3::new(v[0].clamp(0.0, 1.0), v[1].clamp(0.0, 1.0), v[2].clamp(0.0, 1.0))
            }
        }
    }
}

/// Projection onto the triangle {x >= 0, z >= 0, x + z <= 1}.
fn project_right_triangle(x: f64, z: f64) -> (f64, f64) {
    if x >= 0.0 && z >= 0.0 && x + z <= 1.0 {
        return (x, z);
    }
    let candidates = [
        (x.clamp(0.0, 1.0), 0.0),
        (0.0, z.clamp(0.0, 1.0)),
        {
            let t = ((x - z + 1.0) / 2.0).clamp(0.0, 1.0);
            (t, 1.0 - t)
        },
    ];
    let mut best = candidates[0];
    let mut best_d = f64::INFINITY;
    for c in candidates {
        let d = (c.0 - x).powi(2) + (c.1 - z).powi(2);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

/// Pool-adjacent-violators for a non-increasing fit of three values.
fn isotonic_decreasing(v: [f64; 3]) -> [f64; 3] {
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(3);
    for &x in &v {
        blocks.push((x, 1));
        while blocks.len() > 1 {
            let (b, nb) = blocks[blocks.len() - 1];
            let (a, na) = blocks[blocks.len() - 2];
            if a >= b {
                break;
            }
            blocks.pop();
            blocks.pop();
            let n = na + nb;
            blocks.push(((a * na as f64 + b * nb as f64) / n as f64, n));
        }
    }
    let mut out = [0.0; 3];
    let mut i = 0;
    for (val, n) in blocks {
        for _ in 0..n {
            out[i] = val;
            i += 1;
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EntityRef {
    pub polytope: PolytopeKind,
    pub category: EntityCategory,
    pub index: usize,
}

impl EntityRef {
    pub fn canonical_name(&self) -> &'static str {
        self.polytope.entity_names(self.category)[self.index]
    }

    pub fn corners(&self) -> Vec<usize> {
        self.polytope.entity_corners(self.category, self.index)
    }

    /// Program spelling, e.g. `cuboid.edges.TOP_LEFT`.
    pub fn path(&self) -> String {
        format!("{}.{}.{}", self.polytope.name(), self.category.plural(), self.canonical_name())
    }

    /// Canonical centroid of the entity.
    pub fn centroid(&self) -> Vec3 {
        let cs = self.corners();
        cs.iter().map(|&c| self.polytope.corner(c)).sum::<Vec3>() / cs.len() as f64
    }
}

fn sorted_words(name: &str) -> Vec<String> {
    let mut w: Vec<String> = name
        .split('_')
        .filter(|s| !s.is_empty())
        .map(|s| s.to_ascii_uppercase())
        .collect();
    w.sort();
    w
}

pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for i in 1..=a.len() {
        cur[0] = i;
        for j in 1..=b.len() {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            cur[j] = sub.min(prev[j] + 1).min(cur[j - 1] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Resolve an entity name, accepting any case and any ordering of its direction words.
pub fn resolve_entity(
    polytope: PolytopeKind,
    category: EntityCategory,
    name: &str,
) -> Result<EntityRef, CpError> {
    let words = sorted_words(name);
    let names = polytope.entity_names(category);
    if let Some(index) = names.iter().position(|n| sorted_words(n) == words) {
        return Ok(EntityRef { polytope, category, index });
    }
    let upper = name.to_ascii_uppercase();
    let mut scored: Vec<(usize, usize)> =
        names.iter().enumerate().map(|(i, n)| (levenshtein(&upper, n), i)).collect();
    scored.sort();
    let suggestions = scored.iter().take(3).map(|&(_, i)| names[i].to_string()).collect();
    Err(CpError::UnknownEntity {
        polytope: polytope.name().to_string(),
        category: category.plural().to_string(),
        name: name.to_string(),
        suggestions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entity_counts_match_reference_lists() {
        let counts = |k: PolytopeKind| {
            (
                k.entity_count(EntityCategory::Corner),
                k.entity_count(EntityCategory::Edge),
                k.entity_count(EntityCategory::Face),
            )
        };
        assert_eq!(counts(PolytopeKind::Cuboid), (8, 12, 6));
        assert_eq!(counts(PolytopeKind::TriPrism), (6, 9, 5));
        assert_eq!(counts(PolytopeKind::Tet), (4, 6, 4));
    }

    #[test]
    fn edges_join_distinct_corners_and_faces_are_planar() {
        for k in PolytopeKind::ALL {
            for (_, [a, b]) in k.edges() {
                assert_ne!(a, b);
                assert!((k.corner(*a) - k.corner(*b)).norm() > 0.5);
            }
            for f in 0..k.num_faces() {
                let (n, d) = k.face_plane(f);
                for &c in k.faces()[f].1 {
                    assert!((n.dot(&k.corner(c)) - d).abs() < 1e-12);
                }
                for c in 0..k.num_corners() {
                    assert!(n.dot(&k.corner(c)) - d <= 1e-12, "{k:?} face {f} not outward");
                }
            }
        }
    }

    #[test]
    fn every_edge_lies_on_exactly_two_faces() {
        for k in PolytopeKind::ALL {
            for (name, pair) in k.edges() {
                let n = k.faces().iter().filter(|f| pair.iter().all(|c| f.1.contains(c))).count();
                assert_eq!(n, 2, "{k:?} {name}");
            }
        }
    }

    #[test]
    fn word_permutations_resolve() {
        let e = resolve_entity(PolytopeKind::Cuboid, EntityCategory::Edge, "LEFT_TOP").unwrap();
        assert_eq!(e.canonical_name(), "TOP_LEFT");
        let c = resolve_entity(PolytopeKind::Cuboid, EntityCategory::Corner, "left_back_top").unwrap();
        assert_eq!(c.canonical_name(), "BACK_TOP_LEFT");
    }

    #[test]
    fn unknown_entity_has_three_suggestions() {
        match resolve_entity(PolytopeKind::Tet, EntityCategory::Face, "NORTH") {
            Err(CpError::UnknownEntity { suggestions, .. }) => assert_eq!(suggestions.len(), 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn interior_category_is_rejected() {
        assert!(matches!(EntityCategory::parse("interior"), Err(CpError::NotImplemented(_))));
    }

    #[test]
    fn projections_land_inside() {
        let pts = [Vec3::new(0.2, 0.9, -0.3), Vec3::new(1.4, 0.5, 0.9), Vec3::new(-0.1, 0.3, 0.6)];
        for k in PolytopeKind::ALL {
            for p in &pts {
                let q = k.project_inside(p);
                assert!(k.inside_measure(&q) <= 1e-12, "{k:?} {q:?}");
                let inner = k.centroid();
                assert!((k.project_inside(&inner) - inner).norm() < 1e-12);
            }
        }
    }
}
