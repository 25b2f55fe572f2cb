//! Program-level names bound to library operations.

use std::rc::Rc;

use super::ast::Span;
use super::interp::{as_integer, as_number, type_error, Interp};
use super::value::Value;
use super::{ApiError, FrontendError};
use crate::assembly::{
    embed_cuboid, embed_simplex, embed_via_minmax, AssemblyError, CsgOp, CustomKind, CustomOp, PatternOp, StructureIR,
    Tile,
};
use crate::cp_core::{
    build_skeleton, make_path, make_vertex, resolve_entity, CpError, EntityCategory, EntityRef, LiftKind, PolytopeKind,
    SkeletonItem, Vec3,
};
use crate::lifting::{lift, LiftError, Thickness, ThicknessProfile};

const PYTHON_BUILTINS: [&str; 11] = ["range", "len", "abs", "min", "max", "float", "int", "round", "sum", "print", "pow"];

const DSL_BUILTINS: [&str; 23] = [
    "vertex",
    "Polyline",
    "Curve",
    "skeleton",
    "UniformBeams",
    "SpatiallyVaryingBeams",
    "UniformDirectShell",
    "UniformTPMSShellViaConjugation",
    "UniformTPMSShellViaMixedMinimal",
    "Spheres",
    "Tile",
    "TetFullMirror",
    "TriPrismFullMirror",
    "CuboidFullMirror",
    "Identity",
    "Custom",
    "Mirror",
    "Rotate180",
    "Translate",
    "Structure",
    "Union",
    "Subtract",
    "Intersect",
];

/// Accepted spellings of the embed corner keyword.
const CORNER_KEYWORDS: [&str; 2] = ["cornerAtMinPt", "cornerAtAABBMin"];

pub(super) fn names() -> impl Iterator<Item = &'static str> {
    PYTHON_BUILTINS.iter().chain(DSL_BUILTINS.iter()).copied().chain(PolytopeKind::ALL.iter().map(|p| p.name()))
}

pub(super) fn lookup(name: &str) -> Option<Value> {
    if let Some(p) = PolytopeKind::from_name(name) {
        return Some(Value::Polytope(p));
    }
    PYTHON_BUILTINS.iter().chain(DSL_BUILTINS.iter()).find(|b| **b == name).map(|b| Value::Builtin(b))
}

/// Library errors that amount to a type violation of the program are reported as such.
fn wrap(err: ApiError, callee: &str, span: Span) -> FrontendError {
    let type_like = match &err {
        ApiError::Cp(e) | ApiError::Lift(LiftError::Cp(e)) => matches!(
            e,
            CpError::InterpolantArity { .. }
                | CpError::MixedPolytopes
                | CpError::MixedDimensions
                | CpError::IncompatibleLift { .. }
        ),
        ApiError::Assembly(AssemblyError::TileMismatch(_)) => true,
        _ => false,
    };
    if type_like {
        FrontendError::Type { span, message: format!("{callee}(): {err}") }
    } else {
        FrontendError::Api { span, callee: callee.to_string(), source: err }
    }
}

pub(super) fn attribute(obj: Value, name: &str, span: Span) -> Result<Value, FrontendError> {
    match &obj {
        Value::Polytope(p) => match name {
            "embed" => Ok(Value::Method(Box::new(obj.clone()), "embed")),
            "embed_via_minmax" if *p == PolytopeKind::Cuboid => {
                Ok(Value::Method(Box::new(obj.clone()), "embed_via_minmax"))
            }
            _ => EntityCategory::parse(name)
                .map(|c| Value::Category(*p, c))
                .map_err(|e| wrap(e.into(), &format!("{}.{name}", p.name()), span)),
        },
        Value::Category(p, c) => resolve_entity(*p, *c, name)
            .map(Value::Entity)
            .map_err(|e| wrap(e.into(), &format!("{}.{}", p.name(), c.plural()), span)),
        Value::List(_) if name == "append" || name == "extend" => {
            let method = if name == "append" { "append" } else { "extend" };
            Ok(Value::Method(Box::new(obj.clone()), method))
        }
        _ => type_error(span, format!("{} has no attribute '{name}'", obj.type_name())),
    }
}

type Arg = (Value, Span);

/// Positional and keyword arguments matched against a parameter list.
struct Bound {
    callee: String,
    slots: Vec<Option<Arg>>,
    params: &'static [&'static str],
    span: Span,
}

fn bind(
    callee: &str,
    params: &'static [&'static str],
    required: usize,
    args: Vec<Arg>,
    kwargs: Vec<(String, Value, Span)>,
    span: Span,
) -> Result<Bound, FrontendError> {
    if args.len() > params.len() {
        return type_error(
            span,
            format!("{callee}() takes at most {} argument(s) but {} were given", params.len(), args.len()),
        );
    }
    let mut slots: Vec<Option<Arg>> = vec![None; params.len()];
    for (i, a) in args.into_iter().enumerate() {
        slots[i] = Some(a);
    }
    for (name, v, kspan) in kwargs {
        let canonical = if CORNER_KEYWORDS.contains(&name.as_str()) && params.contains(&"cornerAtMinPt") {
            "cornerAtMinPt"
        } else {
            name.as_str()
        };
        let Some(i) = params.iter().position(|p| *p == canonical) else {
            return type_error(kspan, format!("{callee}() got an unexpected keyword argument '{name}'"));
        };
        if slots[i].is_some() {
            return type_error(kspan, format!("{callee}() got multiple values for argument '{}'", params[i]));
        }
        slots[i] = Some((v, kspan));
    }
    if let Some(i) = (0..required).find(|&i| slots[i].is_none()) {
        return type_error(span, format!("{callee}() missing required argument '{}'", params[i]));
    }
    Ok(Bound { callee: callee.to_string(), slots, params, span })
}

impl Bound {
    fn get(&self, i: usize) -> Option<&Arg> {
        self.slots[i].as_ref().filter(|(v, _)| !matches!(v, Value::None))
    }

    fn arg(&self, i: usize) -> &Arg {
        self.slots[i].as_ref().expect("required arguments are bound")
    }

    fn mismatch<T>(&self, i: usize, expected: &str) -> Result<T, FrontendError> {
        let (v, span) = self.slots[i].as_ref().map_or((&Value::None, self.span), |(v, s)| (v, *s));
        type_error(
            span,
            format!("{}() argument '{}' must be {expected}, got {}", self.callee, self.params[i], v.type_name()),
        )
    }

    fn number(&self, i: usize) -> Result<f64, FrontendError> {
        match as_number(&self.arg(i).0) {
            Some(x) => Ok(x),
            None => self.mismatch(i, "a number"),
        }
    }

    fn boolean(&self, i: usize) -> Result<bool, FrontendError> {
        match &self.arg(i).0 {
            Value::Bool(b) => Ok(*b),
            Value::Number(x) if *x == 0.0 || *x == 1.0 => Ok(*x == 1.0),
            _ => self.mismatch(i, "True or False"),
        }
    }

    fn list(&self, i: usize) -> Result<Vec<Value>, FrontendError> {
        match &self.arg(i).0 {
            Value::List(l) => Ok(l.borrow().clone()),
            _ => self.mismatch(i, "a list"),
        }
    }

    fn numbers(&self, i: usize) -> Result<Vec<f64>, FrontendError> {
        self.list(i)?.iter().map(|v| as_number(v).map_or_else(|| self.mismatch(i, "a list of numbers"), Ok)).collect()
    }

    fn entity(&self, i: usize) -> Result<EntityRef, FrontendError> {
        match &self.arg(i).0 {
            Value::Entity(e) => Ok(*e),
            _ => self.mismatch(i, "a CP entity"),
        }
    }

    fn entities(&self, i: usize) -> Result<Vec<EntityRef>, FrontendError> {
        match &self.arg(i).0 {
            Value::Entity(e) => Ok(vec![*e]),
            Value::List(l) => l
                .borrow()
                .iter()
                .map(|v| match v {
                    Value::Entity(e) => Ok(*e),
                    _ => self.mismatch(i, "a list of CP entities"),
                })
                .collect(),
            _ => self.mismatch(i, "a list of CP entities"),
        }
    }

    fn structure(&self, i: usize) -> Result<StructureIR, FrontendError> {
        match &self.arg(i).0 {
            Value::Structure(s) => Ok((**s).clone()),
            _ => self.mismatch(i, "a Structure"),
        }
    }

    fn inner_step(&self, i: usize) -> Result<Option<CustomOp>, FrontendError> {
        match self.get(i) {
            None => Ok(None),
            Some((Value::PatternStep(op), _)) => Ok(Some((**op).clone())),
            Some(_) => self.mismatch(i, "a pattern operation (Mirror, Rotate180 or Translate)"),
        }
    }

    fn api<T>(&self, r: Result<T, impl Into<ApiError>>) -> Result<T, FrontendError> {
        r.map_err(|e| wrap(e.into(), &self.callee, self.span))
    }
}

fn vec3(b: &Bound, i: usize) -> Result<Vec3, FrontendError> {
    let v = b.numbers(i)?;
    if v.len() != 3 {
        return b.mismatch(i, "a list of 3 numbers");
    }
    Ok(Vec3::new(v[0], v[1], v[2]))
}

fn corner(b: &Bound, i: usize) -> Result<EntityRef, FrontendError> {
    let e = b.entity(i)?;
    if e.polytope != PolytopeKind::Cuboid || e.category != EntityCategory::Corner {
        return b.mismatch(i, "a cuboid corner");
    }
    Ok(e)
}

fn lift_kind(name: &str) -> Option<LiftKind> {
    LiftKind::from_name(name)
}

pub(super) fn call(
    interp: &mut Interp,
    name: &'static str,
    receiver: Option<Value>,
    args: Vec<Arg>,
    kwargs: Vec<(String, Value, Span)>,
    span: Span,
) -> Result<Value, FrontendError> {
    if let Some(recv) = receiver {
        return call_method(recv, name, args, kwargs, span);
    }
    if PYTHON_BUILTINS.contains(&name) {
        if !kwargs.is_empty() {
            return type_error(kwargs[0].2, format!("{name}() takes no keyword arguments"));
        }
        return call_python(name, args, span);
    }
    if let Some(kind) = lift_kind(name) {
        let b = bind(name, &["skel", "thickness"], 2, args, kwargs, span)?;
        let Value::Skeleton(skel) = &b.arg(0).0 else { return b.mismatch(0, "a skeleton") };
        let thickness = match (&b.arg(1).0, kind) {
            (Value::List(_), LiftKind::SpatiallyVaryingBeams) => {
                let mut samples = Vec::new();
                for row in b.list(1)? {
                    let Value::List(pair) = &row else { return b.mismatch(1, "a list of [t, thickness] pairs") };
                    let pair = pair.borrow();
                    match (pair.len(), pair.first().and_then(as_number), pair.get(1).and_then(as_number)) {
                        (2, Some(t), Some(d)) => samples.push((t, d)),
                        _ => return b.mismatch(1, "a list of [t, thickness] pairs"),
                    }
                }
                Thickness::Profile(b.api(ThicknessProfile::new(samples))?)
            }
            _ => Thickness::Uniform(b.number(1)?),
        };
        let lifted = b.api(lift(skel, kind, thickness, &interp.opts.shell))?;
        return Ok(Value::Lifted(Rc::new(lifted)));
    }
    match name {
        "vertex" => {
            let b = bind(name, &["cpEntity", "t"], 1, args, kwargs, span)?;
            let e = b.entity(0)?;
            let t = match b.get(1) {
                None => None,
                Some((Value::List(_), _)) => Some(b.numbers(1)?),
                Some(_) => return b.mismatch(1, "a list of numbers"),
            };
            let v = b.api(make_vertex(e, t.as_deref()))?;
            Ok(Value::Vertex(Rc::new(v)))
        }
        "Polyline" | "Curve" => {
            let b = bind(name, &["ordered_verts"], 1, args, kwargs, span)?;
            let verts = b
                .list(0)?
                .into_iter()
                .map(|v| match v {
                    Value::Vertex(v) => Ok((*v).clone()),
                    _ => b.mismatch(0, "a list of vertices"),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let p = b.api(make_path(verts, name == "Curve"))?;
            Ok(Value::Path(Rc::new(p)))
        }
        "skeleton" => {
            let b = bind(name, &["entities"], 1, args, kwargs, span)?;
            let items = b
                .list(0)?
                .into_iter()
                .map(|v| match v {
                    Value::Vertex(v) => Ok(SkeletonItem::Vertex((*v).clone())),
                    Value::Path(p) => Ok(SkeletonItem::Path((*p).clone())),
                    _ => b.mismatch(0, "a list of vertices or paths"),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let s = b.api(build_skeleton(items))?;
            Ok(Value::Skeleton(Rc::new(s)))
        }
        "Tile" => {
            let b = bind(name, &["lifted_skeletons", "embedding"], 2, args, kwargs, span)?;
            let lifted = b
                .list(0)?
                .into_iter()
                .map(|v| match v {
                    Value::Lifted(l) => Ok((*l).clone()),
                    _ => b.mismatch(0, "a list of lifted skeletons"),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let Value::Embedding(emb) = &b.arg(1).0 else { return b.mismatch(1, "an embedding from a CP embed() method") };
            let tile = b.api(Tile::new(lifted, (**emb).clone()))?;
            Ok(Value::Tile(Rc::new(tile)))
        }
        "TetFullMirror" | "TriPrismFullMirror" | "CuboidFullMirror" | "Identity" => {
            bind(name, &[], 0, args, kwargs, span)?;
            let op = match name {
                "TetFullMirror" => PatternOp::TetFullMirror,
                "TriPrismFullMirror" => PatternOp::TriPrismFullMirror,
                "CuboidFullMirror" => PatternOp::CuboidFullMirror,
                _ => PatternOp::Identity,
            };
            Ok(Value::Pattern(Rc::new(op)))
        }
        "Custom" => {
            let b = bind(name, &["patternOp"], 1, args, kwargs, span)?;
            match b.inner_step(0)? {
                Some(op) => Ok(Value::Pattern(Rc::new(PatternOp::Custom(op)))),
                None => b.mismatch(0, "a pattern operation (Mirror, Rotate180 or Translate)"),
            }
        }
        "Mirror" => {
            let b = bind(name, &["entity", "doCopy", "patternOp"], 2, args, kwargs, span)?;
            let op = CustomOp::new(CustomKind::Mirror(b.entity(0)?), b.boolean(1)?, b.inner_step(2)?);
            Ok(Value::PatternStep(Rc::new(op)))
        }
        "Rotate180" => {
            let b = bind(name, &["entities", "doCopy", "patternOp"], 2, args, kwargs, span)?;
            let op = CustomOp::new(CustomKind::Rotate180(b.entities(0)?), b.boolean(1)?, b.inner_step(2)?);
            Ok(Value::PatternStep(Rc::new(op)))
        }
        "Translate" => {
            let b = bind(name, &["fromEntity", "toEntity", "doCopy", "patternOp"], 3, args, kwargs, span)?;
            let kind = CustomKind::Translate(b.entity(0)?, b.entity(1)?);
            let op = CustomOp::new(kind, b.boolean(2)?, b.inner_step(3)?);
            Ok(Value::PatternStep(Rc::new(op)))
        }
        "Structure" => {
            let b = bind(name, &["tile", "pattern"], 2, args, kwargs, span)?;
            let Value::Tile(tile) = &b.arg(0).0 else { return b.mismatch(0, "a Tile") };
            let pattern = match &b.arg(1).0 {
                Value::Pattern(p) => (**p).clone(),
                Value::PatternStep(_) => return b.mismatch(1, "a pattern (wrap pattern operations in Custom)"),
                _ => return b.mismatch(1, "a pattern"),
            };
            let s = b.api(StructureIR::new((**tile).clone(), pattern))?;
            Ok(Value::Structure(Rc::new(s)))
        }
        "Union" | "Subtract" | "Intersect" => {
            let b = bind(name, &["A", "B"], 2, args, kwargs, span)?;
            let op = match name {
                "Union" => CsgOp::Union,
                "Subtract" => CsgOp::Subtract,
                _ => CsgOp::Intersect,
            };
            Ok(Value::Structure(Rc::new(StructureIR::csg(op, b.structure(0)?, b.structure(1)?))))
        }
        _ => type_error(span, format!("{name} is not callable")),
    }
}

fn call_method(
    recv: Value,
    name: &'static str,
    args: Vec<Arg>,
    kwargs: Vec<(String, Value, Span)>,
    span: Span,
) -> Result<Value, FrontendError> {
    match (&recv, name) {
        (Value::List(items), "append" | "extend") => {
            let b = bind(name, &["item"], 1, args, kwargs, span)?;
            if name == "append" {
                items.borrow_mut().push(b.arg(0).0.clone());
            } else {
                let more = b.list(0)?;
                items.borrow_mut().extend(more);
            }
            Ok(Value::None)
        }
        (Value::Polytope(PolytopeKind::Cuboid), _) => {
            let minmax = name == "embed_via_minmax" || matches!(args.first(), Some((Value::List(_), _)));
            let emb = if minmax {
                let callee = format!("cuboid.{name}");
                let b = bind(&callee, &["aabb_min_pt", "aabb_max_pt", "cornerAtMinPt"], 3, args, kwargs, span)?;
                b.api(embed_via_minmax(vec3(&b, 0)?, vec3(&b, 1)?, &corner(&b, 2)?))?
            } else {
                let b = bind("cuboid.embed", &["width", "height", "depth", "cornerAtMinPt"], 4, args, kwargs, span)?;
                b.api(embed_cuboid(b.number(0)?, b.number(1)?, b.number(2)?, &corner(&b, 3)?))?
            };
            Ok(Value::Embedding(Rc::new(emb)))
        }
        (Value::Polytope(p), "embed") => {
            let callee = format!("{}.embed", p.name());
            let b = bind(&callee, &["bounding_box_side_length"], 1, args, kwargs, span)?;
            let emb = b.api(embed_simplex(*p, b.number(0)?))?;
            Ok(Value::Embedding(Rc::new(emb)))
        }
        _ => type_error(span, format!("{} has no method '{name}'", recv.type_name())),
    }
}

fn call_python(name: &str, args: Vec<Arg>, span: Span) -> Result<Value, FrontendError> {
    let num = |(v, s): &Arg| as_number(v).map_or_else(|| type_error(*s, format!("{name}() expects numbers, got {}", v.type_name())), Ok);
    let arity = |lo: usize, hi: usize| {
        if args.len() < lo || args.len() > hi {
            type_error(span, format!("{name}() takes {lo} to {hi} arguments, got {}", args.len()))
        } else {
            Ok(())
        }
    };
    match name {
        "range" => {
            arity(1, 3)?;
            let ints = args.iter().map(|(v, s)| as_integer(v, *s, "range() argument")).collect::<Result<Vec<_>, _>>()?;
            let (start, stop, step) = match ints.as_slice() {
                [stop] => (0, *stop, 1),
                [start, stop] => (*start, *stop, 1),
                [start, stop, step] => (*start, *stop, *step),
                _ => unreachable!("arity checked"),
            };
            if step == 0 {
                return Err(FrontendError::Value { span, message: "range() step must not be zero".into() });
            }
            let mut out = Vec::new();
            let mut i = start;
            while (step > 0 && i < stop) || (step < 0 && i > stop) {
                out.push(Value::Number(i as f64));
                i += step;
                if out.len() > 10_000_000 {
                    return Err(FrontendError::Value { span, message: "range() is too long".into() });
                }
            }
            Ok(Value::list(out))
        }
        "len" => {
            arity(1, 1)?;
            match &args[0].0 {
                Value::List(l) => Ok(Value::Number(l.borrow().len() as f64)),
                Value::Str(s) => Ok(Value::Number(s.chars().count() as f64)),
                other => type_error(args[0].1, format!("len() of {}", other.type_name())),
            }
        }
        "abs" => {
            arity(1, 1)?;
            Ok(Value::Number(num(&args[0])?.abs()))
        }
        "float" => {
            arity(1, 1)?;
            Ok(Value::Number(num(&args[0])?))
        }
        "int" => {
            arity(1, 1)?;
            Ok(Value::Number(num(&args[0])?.trunc()))
        }
        "round" => {
            arity(1, 2)?;
            let x = num(&args[0])?;
            let digits = if args.len() == 2 { as_integer(&args[1].0, args[1].1, "round() digits")? } else { 0 };
            let scale = 10f64.powi(digits as i32);
            // Python rounds halves to even.
            let y = x * scale;
            let r = y.round();
            let r = if (y - y.trunc()).abs() == 0.5 && r % 2.0 != 0.0 { r - y.signum() } else { r };
            Ok(Value::Number(r / scale))
        }
        "pow" => {
            arity(2, 2)?;
            Ok(Value::Number(num(&args[0])?.powf(num(&args[1])?)))
        }
        "min" | "max" | "sum" => {
            let items: Vec<Arg> = match args.as_slice() {
                [(Value::List(l), s)] => l.borrow().iter().map(|v| (v.clone(), *s)).collect(),
                _ => args.clone(),
            };
            let xs = items.iter().map(num).collect::<Result<Vec<_>, _>>()?;
            if name == "sum" {
                return Ok(Value::Number(xs.iter().sum()));
            }
            if xs.is_empty() {
                return Err(FrontendError::Value { span, message: format!("{name}() of an empty sequence") });
            }
            let f = if name == "min" { f64::min } else { f64::max };
            Ok(Value::Number(xs.into_iter().reduce(f).expect("non-empty")))
        }
        "print" => Ok(Value::None),
        _ => type_error(span, format!("{name} is not callable")),
    }
}
