use std::fmt::Write as _;

use crate::assembly::{Embedding, Leaf, StructureIR};
use crate::cp_core::{PolytopeKind, SkeletonItem, VertexSpec};
use crate::frontend::{ParamSpec, ENTRY_POINT};
use crate::lifting::{LiftedSkeleton, Thickness};

fn num(x: f64) -> String {
    format!("{x:?}")
}

fn vec3(v: &crate::cp_core::Vec3) -> String {
    format!("[{}, {}, {}]", num(v.x), num(v.y), num(v.z))
}

fn suffixed(base: &str, i: usize, count: usize) -> String {
    if count == 1 || i == 0 {
        base.to_string()
    } else {
        format!("{base}{i}")
    }
}

#[derive(Default)]
struct Writer {
    body: String,
    vertices: Vec<(String, String)>,
    paths: usize,
}

impl Writer {
    fn line(&mut self, text: &str) {
        let _ = writeln!(self.body, "    {text}");
    }

    fn vertex(&mut self, v: &VertexSpec) -> String {
        let call = match &v.t {
            Some(t) => {
                let parts: Vec<String> = t.iter().map(|x| num(*x)).collect();
                format!("vertex({}, [{}])", v.entity.path(), parts.join(", "))
            }
            None => format!("vertex({})", v.entity.path()),
        };
        if let Some((name, _)) = self.vertices.iter().find(|(_, c)| *c == call) {
            return name.clone();
        }
        let name = format!("v{}", self.vertices.len());
        self.line(&format!("{name} = {call}"));
        self.vertices.push((name.clone(), call));
        name
    }

    fn lifted(&mut self, l: &LiftedSkeleton, skel_name: &str, lift_name: &str) {
        let mut parts = Vec::new();
        for item in &l.skeleton.items {
            match item {
                SkeletonItem::Vertex(v) => parts.push(self.vertex(v)),
                SkeletonItem::Path(p) => {
                    let names: Vec<String> = p.vertices.iter().map(|v| self.vertex(v)).collect();
                    let name = format!("p{}", self.paths);
                    self.paths += 1;
                    let ctor = if p.smooth { "Curve" } else { "Polyline" };
                    self.line(&format!("{name} = {ctor}([{}])", names.join(", ")));
                    parts.push(name);
                }
            }
        }
        self.line(&format!("{skel_name} = skeleton([{}])", parts.join(", ")));
        let thickness = match &l.thickness {
            Thickness::Uniform(t) => num(*t),
            Thickness::Profile(p) => {
                let pairs: Vec<String> = p.samples.iter().map(|(t, d)| format!("[{}, {}]", num(*t), num(*d))).collect();
                format!("[{}]", pairs.join(", "))
            }
        };
        self.line(&format!("{lift_name} = {}({skel_name}, {thickness})", l.kind.name()));
    }

    fn embedding(&mut self, e: &Embedding, name: &str) {
        let call = match (e.polytope, &e.corner_at_min) {
            (PolytopeKind::Cuboid, Some(corner)) => format!(
                "cuboid.embed_via_minmax({}, {}, cornerAtMinPt={})",
                vec3(&e.bbox_min()),
                vec3(&e.bbox_max()),
                corner.path()
            ),
            (p, _) => format!("{}.embed({})", p.name(), num(e.size().x)),
        };
        self.line(&format!("{name} = {call}"));
    }

    /// Emit one leaf and return the name bound to its Structure.
    fn leaf(&mut self, leaf: &Leaf, k: usize, leaves: usize, lifts_before: &mut usize, out: &str) {
        let mut lift_names = Vec::new();
        for l in &leaf.tile.lifted {
            let idx = *lifts_before;
            *lifts_before += 1;
            let skel = if idx == 0 { "skel".to_string() } else { format!("skel{idx}") };
            let lift = if idx == 0 { "lift".to_string() } else { format!("lift{idx}") };
            self.lifted(l, &skel, &lift);
            lift_names.push(lift);
        }
        let emb = suffixed("emb", k, leaves);
        let tile = suffixed("tile", k, leaves);
        let pat = suffixed("pat", k, leaves);
        self.embedding(&leaf.tile.embedding, &emb);
        self.line(&format!("{tile} = Tile([{}], {emb})", lift_names.join(", ")));
        self.line(&format!("{pat} = {}", leaf.pattern.describe()));
        self.line(&format!("{out} = Structure({tile}, {pat})"));
    }
}

fn emit_node(
    w: &mut Writer,
    ir: &StructureIR,
    leaves: usize,
    counters: &mut (usize, usize, usize),
    out: Option<&str>,
) -> String {
    match ir {
        StructureIR::Leaf(leaf) => {
            let k = counters.0;
            counters.0 += 1;
            let name = out.map_or_else(|| format!("part{k}"), str::to_string);
            w.leaf(leaf, k, leaves, &mut counters.1, &name);
            name
        }
        StructureIR::Csg { op, left, right } => {
            let a = emit_node(w, left, leaves, counters, None);
            let b = emit_node(w, right, leaves, counters, None);
            let name = out.map_or_else(
                || {
                    counters.2 += 1;
                    format!("csg{}", counters.2 - 1)
                },
                str::to_string,
            );
            w.line(&format!("{name} = {}({a}, {b})", op.name()));
            name
        }
    }
}

/// Write a structure back out as a program whose entry point takes `params`.
///
/// Every value is written literally, so the parameters only document the
/// parent's interface.
pub fn emit_program(ir: &StructureIR, params: Option<&[ParamSpec]>) -> String {
    let mut w = Writer::default();
    let leaves = ir.leaves().len();
    let root = emit_node(&mut w, ir, leaves, &mut (0, 0, 0), Some("obj"));
    let signature: Vec<String> = params
        .unwrap_or_default()
        .iter()
        .map(|p| format!("{}={}", p.name, num(p.default)))
        .collect();
    format!(
        "from metagen import *\n\ndef {ENTRY_POINT}({}) -> Structure:\n{}    return {root}\n",
        signature.join(", "),
        w.body
    )
}
