//! Tiles, structures, CSG trees and their point-evaluable solid field.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::embedding::Embedding;
use super::pattern::{expand_pattern, fold_for, Fold, Isometry, PatternOp, TransformSet};
use super::AssemblyError;
use crate::cp_core::Vec3;
use crate::lifting::{LiftedSkeleton, Primitives, Thickness};

#[derive(Clone, Debug, PartialEq)]
pub struct Tile {
    pub lifted: Vec<LiftedSkeleton>,
    pub embedding: Embedding,
}

impl Tile {
    pub fn new(lifted: Vec<LiftedSkeleton>, embedding: Embedding) -> Result<Self, AssemblyError> {
        if lifted.is_empty() {
            return Err(AssemblyError::TileMismatch("a tile needs at least one lifted skeleton".into()));
        }
        for l in &lifted {
            if l.skeleton.polytope != embedding.polytope {
                return Err(AssemblyError::TileMismatch(format!(
                    "skeleton is defined on {} but the embedding is for {}",
                    l.skeleton.polytope.name(),
                    embedding.polytope.name()
                )));
            }
        }
        Ok(Tile { lifted, embedding })
    }

    /// World-space primitives of every lifted skeleton in the fundamental tile.
    pub fn primitives(&self) -> Vec<Primitives> {
        let emb = &self.embedding;
        self.lifted.iter().map(|l| l.primitives(&|w| emb.map(w))).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Leaf {
    pub tile: Tile,
    pub pattern: PatternOp,
    pub transforms: TransformSet,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CsgOp {
    Union,
    Subtract,
    Intersect,
}

impl CsgOp {
    pub fn name(self) -> &'static str {
        match self {
            CsgOp::Union => "Union",
            CsgOp::Subtract => "Subtract",
            CsgOp::Intersect => "Intersect",
        }
    }

    pub fn combine(self, a: f64, b: f64) -> f64 {
        match self {
            CsgOp::Union => a.min(b),
            CsgOp::Intersect => a.max(b),
            CsgOp::Subtract => a.max(-b),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StructureIR {
    Leaf(Box<Leaf>),
    Csg { op: CsgOp, left: Box<StructureIR>, right: Box<StructureIR> },
}

impl StructureIR {
    pub fn new(tile: Tile, pattern: PatternOp) -> Result<Self, AssemblyError> {
        let transforms = expand_pattern(&pattern, &tile.embedding)?;
        Ok(StructureIR::Leaf(Box::new(Leaf { tile, pattern, transforms })))
    }

    pub fn csg(op: CsgOp, left: StructureIR, right: StructureIR) -> Self {
        StructureIR::Csg { op, left: Box::new(left), right: Box::new(right) }
    }

    pub fn leaves(&self) -> Vec<&Leaf> {
        match self {
            StructureIR::Leaf(l) => vec![l],
            StructureIR::Csg { left, right, .. } => {
                let mut v = left.leaves();
                v.extend(right.leaves());
                v
            }
        }
    }

    pub fn leaves_mut(&mut self) -> Vec<&mut Leaf> {
        match self {
            StructureIR::Leaf(l) => vec![l],
            StructureIR::Csg { left, right, .. } => {
                let mut v = left.leaves_mut();
                v.extend(right.leaves_mut());
                v
            }
        }
    }

    pub fn compile(&self) -> StructureField {
        StructureField { root: Node::build(self) }
    }
}

enum Node {
    Leaf { prims: Vec<Primitives>, fold: Fold, inverses: Vec<Isometry> },
    Csg { op: CsgOp, left: Box<Node>, right: Box<Node> },
}

impl Node {
    fn build(ir: &StructureIR) -> Node {
        match ir {
            StructureIR::Leaf(leaf) => Node::Leaf {
                prims: leaf.tile.primitives(),
                fold: fold_for(&leaf.pattern, &leaf.tile.embedding),
                inverses: leaf.transforms.isometries.iter().map(Isometry::inverse).collect(),
            },
            StructureIR::Csg { op, left, right } => {
                Node::Csg { op: *op, left: Box::new(Node::build(left)), right: Box::new(Node::build(right)) }
            }
        }
    }

    fn eval(&self, p: &Vec3, enumerate: bool) -> f64 {
        match self {
            Node::Leaf { prims, fold, inverses } => {
                let field = |q: &Vec3| prims.iter().map(|pr| pr.eval(q)).fold(f64::INFINITY, f64::min);
                if enumerate || *fold == Fold::Enumerate {
                    inverses.iter().map(|inv| field(&inv.apply(p))).fold(f64::INFINITY, f64::min)
                } else {
                    field(&fold.apply(p))
                }
            }
            Node::Csg { op, left, right } => op.combine(left.eval(p, enumerate), right.eval(p, enumerate)),
        }
    }
}

/// Compiled solid field of a structure; negative values are solid.
pub struct StructureField {
    root: Node,
}

impl StructureField {
    /// Evaluate using coordinate folding where the pattern allows it.
    pub fn eval(&self, p: &Vec3) -> f64 {
        self.root.eval(p, false)
    }

    /// Evaluate as the minimum over every explicit transform.
    pub fn eval_enumerated(&self, p: &Vec3) -> f64 {
        self.root.eval(p, true)
    }
}

/// One-off field evaluation. Compile once with [`StructureIR::compile`] for repeated queries.
pub fn structure_field(ir: &StructureIR, p: &Vec3) -> f64 {
    ir.compile().eval(p)
}

/// Fixed six-decimal rendering without negative zero.
fn num(v: f64) -> String {
    let s = format!("{v:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

fn fmt_vec(v: &Vec3) -> String {
    format!("[{}, {}, {}]", num(v.x), num(v.y), num(v.z))
}

fn fmt_thickness(t: &Thickness) -> String {
    match t {
        Thickness::Uniform(v) => format!("{v}"),
        Thickness::Profile(p) => {
            let parts: Vec<String> = p.samples.iter().map(|(t, d)| format!("[{t}, {d}]")).collect();
            format!("[{}]", parts.join(", "))
        }
    }
}

fn report_node(ir: &StructureIR, depth: usize, counter: &mut usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match ir {
        StructureIR::Csg { op, left, right } => {
            let _ = writeln!(out, "{pad}{}", op.name());
            report_node(left, depth + 1, counter, out);
            report_node(right, depth + 1, counter, out);
        }
        StructureIR::Leaf(leaf) => {
            let idx = *counter;
            *counter += 1;
            let emb = &leaf.tile.embedding;
            let _ = writeln!(out, "{pad}Structure #{idx}");
            let _ = writeln!(out, "{pad}  tile: {} ({} lifted skeleton(s))", emb.polytope.name(), leaf.tile.lifted.len());
            let _ = writeln!(out, "{pad}  embedding: min {} max {}", fmt_vec(&emb.bbox_min()), fmt_vec(&emb.bbox_max()));
            for (name, p) in emb.polytope.corner_names().iter().zip(&emb.corner_positions) {
                let _ = writeln!(out, "{pad}    {name} {}", fmt_vec(p));
            }
            for l in &leaf.tile.lifted {
                let _ = writeln!(
                    out,
                    "{pad}  lift: {} thickness {} ({} item(s), {} node(s), topology {:?})",
                    l.kind.name(),
                    fmt_thickness(&l.thickness),
                    l.skeleton.items.len(),
                    l.skeleton.nodes.len(),
                    l.skeleton.topology
                );
                if let Some(s) = &l.surface {
                    let _ = writeln!(out, "{pad}    surface: {} vertices, {} triangles", s.vertices.len(), s.triangles.len());
                }
            }
            let _ = writeln!(out, "{pad}  pattern: {}", leaf.pattern.describe());
            let _ = writeln!(out, "{pad}  transforms: {}", leaf.transforms.len());
            for (k, t) in leaf.transforms.isometries.iter().enumerate() {
                let rows: Vec<String> = (0..3)
                    .map(|i| format!("[{}, {}, {}]", num(t.r[(i, 0)]), num(t.r[(i, 1)]), num(t.r[(i, 2)])))
                    .collect();
                let _ = writeln!(out, "{pad}    T{k}: R [{}] t {}", rows.join(", "), fmt_vec(&t.t));
            }
        }
    }
}

/// Deterministic text dump of a structure tree.
pub fn transpile_report(ir: &StructureIR) -> String {
    let mut out = String::new();
    let mut counter = 0;
    report_node(ir, 0, &mut counter, &mut out);
    out
}
