use std::cell::RefCell;
use std::fmt;
use std::rc::Rc;

use super::ast::FunctionDef;
use crate::assembly::{CustomOp, Embedding, PatternOp, StructureIR, Tile};
use crate::cp_core::{EntityCategory, EntityRef, PathSpec, PolytopeKind, SkeletonSpec, VertexSpec};
use crate::lifting::LiftedSkeleton;

/// Runtime values. Library objects are reference counted so copies are cheap.
#[derive(Clone, Debug)]
pub enum Value {
    None,
    Bool(bool),
    Number(f64),
    Str(Rc<str>),
    List(Rc<RefCell<Vec<Value>>>),
    Function(Rc<FunctionDef>),
    Builtin(&'static str),
    /// `cuboid`, `tet`, `triPrism`
    Polytope(PolytopeKind),
    /// `cuboid.edges`
    Category(PolytopeKind, EntityCategory),
    /// `cuboid.embed` and friends, or `list.append`
    Method(Box<Value>, &'static str),
    Entity(EntityRef),
    Vertex(Rc<VertexSpec>),
    Path(Rc<PathSpec>),
    Skeleton(Rc<SkeletonSpec>),
    Lifted(Rc<LiftedSkeleton>),
    Embedding(Rc<Embedding>),
    Tile(Rc<Tile>),
    Pattern(Rc<PatternOp>),
    PatternStep(Rc<CustomOp>),
    Structure(Rc<StructureIR>),
}

impl Value {
    pub fn list(items: Vec<Value>) -> Value {
        Value::List(Rc::new(RefCell::new(items)))
    }

    /// Name used in type errors, matching the program-level vocabulary.
    pub fn type_name(&self) -> &'static str {
        match self {
            Value::None => "None",
            Value::Bool(_) => "bool",
            Value::Number(_) => "number",
            Value::Str(_) => "string",
            Value::List(_) => "list",
            Value::Function(_) | Value::Builtin(_) | Value::Method(..) => "function",
            Value::Polytope(_) => "convex polytope",
            Value::Category(..) => "entity group",
            Value::Entity(e) => match e.category {
                EntityCategory::Corner => "corner",
                EntityCategory::Edge => "edge",
                EntityCategory::Face => "face",
            },
            Value::Vertex(_) => "vertex",
            Value::Path(p) => {
                if p.smooth {
                    "Curve"
                } else {
                    "Polyline"
                }
            }
            Value::Skeleton(_) => "skeleton",
            Value::Lifted(_) => "lifted skeleton",
            Value::Embedding(_) => "embedding",
            Value::Tile(_) => "Tile",
            Value::Pattern(_) => "pattern",
            Value::PatternStep(_) => "pattern operation",
            Value::Structure(_) => "Structure",
        }
    }

    pub fn truthy(&self) -> bool {
        match self {
            Value::None => false,
            Value::Bool(b) => *b,
            Value::Number(x) => *x != 0.0,
            Value::Str(s) => !s.is_empty(),
            Value::List(l) => !l.borrow().is_empty(),
            _ => true,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::None => write!(f, "None"),
            Value::Bool(b) => write!(f, "{}", if *b { "True" } else { "False" }),
            Value::Number(x) => write!(f, "{x}"),
            Value::Str(s) => write!(f, "{s}"),
            Value::List(l) => {
                let items: Vec<String> = l.borrow().iter().map(|v| v.to_string()).collect();
                write!(f, "[{}]", items.join(", "))
            }
            Value::Entity(e) => write!(f, "{}", e.path()),
            other => write!(f, "<{}>", other.type_name()),
        }
    }
}
