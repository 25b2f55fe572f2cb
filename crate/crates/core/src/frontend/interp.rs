//! Tree-walking evaluation with step and recursion limits.

use std::collections::{BTreeMap, HashMap};
use std::rc::Rc;

use super::ast::*;
use super::builtins;
use super::value::Value;
use super::{list_params, FrontendError, DEFAULT_MAX_DEPTH, DEFAULT_MAX_STEPS, ENTRY_POINT};
use crate::assembly::StructureIR;
use crate::cp_core::levenshtein;
use crate::lifting::ShellConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalLimits {
    pub max_depth: usize,
    pub max_steps: u64,
}

impl Default for EvalLimits {
    fn default() -> Self {
        EvalLimits { max_depth: DEFAULT_MAX_DEPTH, max_steps: DEFAULT_MAX_STEPS }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalOptions {
    pub limits: EvalLimits,
    pub shell: ShellConfig,
}

type Env = HashMap<String, Value>;
type EResult<T> = Result<T, FrontendError>;

enum Flow {
    Normal,
    Return(Value),
}

pub(super) struct Interp<'o> {
    globals: Env,
    steps: u64,
    depth: usize,
    pub(super) opts: &'o EvalOptions,
}

pub(super) fn type_error<T>(span: Span, message: impl Into<String>) -> EResult<T> {
    Err(FrontendError::Type { span, message: message.into() })
}

fn value_error<T>(span: Span, message: impl Into<String>) -> EResult<T> {
    Err(FrontendError::Value { span, message: message.into() })
}

/// Numeric value of a constant expression such as `0.03` or `-1/8`.
pub(super) fn constant_number(e: &Expr) -> EResult<f64> {
    let v = match &e.kind {
        ExprKind::Number { value, .. } => *value,
        ExprKind::Unary { op: UnaryOp::Neg, operand } => -constant_number(operand)?,
        ExprKind::Unary { op: UnaryOp::Pos, operand } => constant_number(operand)?,
        ExprKind::Binary { op, left, right } => {
            let (a, b) = (constant_number(left)?, constant_number(right)?);
            arith(*op, a, b, e.span)?
        }
        _ => return type_error(e.span, "parameter defaults must be numeric constants"),
    };
    if !v.is_finite() {
        return value_error(e.span, "parameter defaults must be finite");
    }
    Ok(v)
}

fn arith(op: BinOp, a: f64, b: f64, span: Span) -> EResult<f64> {
    if matches!(op, BinOp::Div | BinOp::FloorDiv | BinOp::Mod) && b == 0.0 {
        return value_error(span, "division by zero");
    }
    Ok(match op {
        BinOp::Add => a + b,
        BinOp::Sub => a - b,
        BinOp::Mul => a * b,
        BinOp::Div => a / b,
        BinOp::FloorDiv => (a / b).floor(),
        BinOp::Mod => a - b * (a / b).floor(),
        BinOp::Pow => a.powf(b),
    })
}

pub(super) fn as_number(v: &Value) -> Option<f64> {
    match v {
        Value::Number(x) => Some(*x),
        Value::Bool(b) => Some(if *b { 1.0 } else { 0.0 }),
        _ => None,
    }
}

/// Integer view of a number, for indices and `range`.
pub(super) fn as_integer(v: &Value, span: Span, what: &str) -> EResult<i64> {
    match as_number(v) {
        Some(x) if x.fract() == 0.0 && x.abs() < 9e15 => Ok(x as i64),
        Some(x) => type_error(span, format!("{what} must be an integer, got {x}")),
        None => type_error(span, format!("{what} must be an integer, got {}", v.type_name())),
    }
}

fn values_equal(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::None, Value::None) => true,
        (Value::Str(x), Value::Str(y)) => x == y,
        (Value::Entity(x), Value::Entity(y)) => x == y,
        (Value::List(x), Value::List(y)) => {
            let (x, y) = (x.borrow(), y.borrow());
            x.len() == y.len() && x.iter().zip(y.iter()).all(|(p, q)| values_equal(p, q))
        }
        _ => match (as_number(a), as_number(b)) {
            (Some(x), Some(y)) => x == y,
            _ => false,
        },
    }
}

impl<'o> Interp<'o> {
    fn new(opts: &'o EvalOptions) -> Self {
        Interp { globals: Env::new(), steps: 0, depth: 0, opts }
    }

    fn tick(&mut self, span: Span) -> EResult<()> {
        self.steps += 1;
        if self.steps > self.opts.limits.max_steps {
            return Err(FrontendError::StepLimit { span, limit: self.opts.limits.max_steps });
        }
        Ok(())
    }

    fn lookup(&self, name: &str, locals: &Option<Env>, span: Span) -> EResult<Value> {
        if let Some(v) = locals.as_ref().and_then(|l| l.get(name)).or_else(|| self.globals.get(name)) {
            return Ok(v.clone());
        }
        if let Some(v) = builtins::lookup(name) {
            return Ok(v);
        }
        let mut candidates: Vec<&str> = builtins::names().collect();
        candidates.extend(self.globals.keys().map(|k| k.as_str()));
        if let Some(l) = locals {
            candidates.extend(l.keys().map(|k| k.as_str()));
        }
        let mut scored: Vec<(usize, &str)> = candidates
            .into_iter()
            .map(|c| (levenshtein(&c.to_lowercase(), &name.to_lowercase()), c))
            .filter(|(d, c)| *d <= 2.max(c.len() / 3))
            .collect();
        scored.sort();
        scored.dedup();
        let suggestions = scored.into_iter().take(3).map(|(_, c)| c.to_string()).collect();
        Err(FrontendError::Name { span, name: name.to_string(), suggestions })
    }

    fn assign(&mut self, name: &str, value: Value, locals: &mut Option<Env>) {
        match locals {
            Some(l) => {
                l.insert(name.to_string(), value);
            }
            None => {
                self.globals.insert(name.to_string(), value);
            }
        }
    }

    fn exec_block(&mut self, body: &[Stmt], locals: &mut Option<Env>) -> EResult<Flow> {
        for s in body {
            if let Flow::Return(v) = self.exec(s, locals)? {
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Normal)
    }

    fn exec(&mut self, s: &Stmt, locals: &mut Option<Env>) -> EResult<Flow> {
        self.tick(s.span)?;
        match &s.kind {
            StmtKind::Import | StmtKind::Pass => {}
            StmtKind::Def(f) => self.assign(&f.name, Value::Function(Rc::new(f.clone())), locals),
            StmtKind::Assign { target, value } => {
                let v = self.eval(value, locals)?;
                match target {
                    Target::Name(n) => self.assign(n, v, locals),
                    Target::Index { object, index } => {
                        let obj = self.eval(object, locals)?;
                        let idx = self.eval(index, locals)?;
                        let Value::List(items) = obj else {
                            return type_error(object.span, format!("cannot assign into {}", obj.type_name()));
                        };
                        let i = self.list_index(items.borrow().len(), &idx, index.span)?;
                        items.borrow_mut()[i] = v;
                    }
                }
            }
            StmtKind::AugAssign { target, op, value } => {
                let current = self.lookup(target, locals, s.span)?;
                let rhs = self.eval(value, locals)?;
                let v = self.binary(*op, current, rhs, s.span)?;
                self.assign(target, v, locals);
            }
            StmtKind::Expr(e) => {
                self.eval(e, locals)?;
            }
            StmtKind::Return(e) => {
                let v = match e {
                    Some(e) => self.eval(e, locals)?,
                    None => Value::None,
                };
                return Ok(Flow::Return(v));
            }
            StmtKind::For { var, iter, body } => {
                let it = self.eval(iter, locals)?;
                let Value::List(items) = it else {
                    return type_error(iter.span, format!("for-loops iterate over lists or range(), got {}", it.type_name()));
                };
                let snapshot = items.borrow().clone();
                for item in snapshot {
                    self.assign(var, item, locals);
                    if let Flow::Return(v) = self.exec_block(body, locals)? {
                        return Ok(Flow::Return(v));
                    }
                }
            }
            StmtKind::If { arms, otherwise } => {
                for (cond, body) in arms {
                    if self.eval(cond, locals)?.truthy() {
                        return self.exec_block(body, locals);
                    }
                }
                return self.exec_block(otherwise, locals);
            }
        }
        Ok(Flow::Normal)
    }

    fn list_index(&self, len: usize, idx: &Value, span: Span) -> EResult<usize> {
        let i = as_integer(idx, span, "list index")?;
        let j = if i < 0 { i + len as i64 } else { i };
        if j < 0 || j >= len as i64 {
            return value_error(span, format!("list index {i} out of range for length {len}"));
        }
        Ok(j as usize)
    }

    fn binary(&mut self, op: BinOp, a: Value, b: Value, span: Span) -> EResult<Value> {
        match (&a, &b, op) {
            (Value::List(x), Value::List(y), BinOp::Add) => {
                let mut items = x.borrow().clone();
                items.extend(y.borrow().iter().cloned());
                return Ok(Value::list(items));
            }
            (Value::List(x), n, BinOp::Mul) | (n, Value::List(x), BinOp::Mul) if as_number(n).is_some() => {
                let k = as_integer(n, span, "list repeat count")?.max(0) as usize;
                let base = x.borrow().clone();
                let items: Vec<Value> = std::iter::repeat(base).take(k).flatten().collect();
                return Ok(Value::list(items));
            }
            (Value::Str(x), Value::Str(y), BinOp::Add) => return Ok(Value::Str(format!("{x}{y}").into())),
            _ => {}
        }
        match (as_number(&a), as_number(&b)) {
            (Some(x), Some(y)) => Ok(Value::Number(arith(op, x, y, span)?)),
            _ => type_error(
                span,
                format!("unsupported operand types for {}: {} and {}", op.symbol(), a.type_name(), b.type_name()),
            ),
        }
    }

    fn compare(&self, op: CmpOp, a: &Value, b: &Value, span: Span) -> EResult<bool> {
        match op {
            CmpOp::Eq => return Ok(values_equal(a, b)),
            CmpOp::Ne => return Ok(!values_equal(a, b)),
            _ => {}
        }
        let ord = match (a, b) {
            (Value::Str(x), Value::Str(y)) => x.partial_cmp(y),
            _ => match (as_number(a), as_number(b)) {
                (Some(x), Some(y)) => x.partial_cmp(&y),
                _ => {
                    return type_error(span, format!("cannot order {} and {}", a.type_name(), b.type_name()));
                }
            },
        };
        let Some(ord) = ord else { return Ok(false) };
        Ok(match op {
            CmpOp::Lt => ord.is_lt(),
            CmpOp::Le => ord.is_le(),
            CmpOp::Gt => ord.is_gt(),
            CmpOp::Ge => ord.is_ge(),
            CmpOp::Eq | CmpOp::Ne => unreachable!("handled above"),
        })
    }

    pub(super) fn eval(&mut self, e: &Expr, locals: &mut Option<Env>) -> EResult<Value> {
        self.tick(e.span)?;
        Ok(match &e.kind {
            ExprKind::Number { value, .. } => Value::Number(*value),
            ExprKind::Str(s) => Value::Str(s.as_str().into()),
            ExprKind::Bool(b) => Value::Bool(*b),
            ExprKind::None => Value::None,
            ExprKind::Name(n) => self.lookup(n, locals, e.span)?,
            ExprKind::Attribute { object, name } => {
                let obj = self.eval(object, locals)?;
                builtins::attribute(obj, name, e.span)?
            }
            ExprKind::Call { func, args, keywords } => {
                let callee = self.eval(func, locals)?;
                let mut argv = Vec::with_capacity(args.len());
                for a in args {
                    argv.push((self.eval(a, locals)?, a.span));
                }
                let mut kwv = Vec::with_capacity(keywords.len());
                for k in keywords {
                    kwv.push((k.name.clone(), self.eval(&k.value, locals)?, k.value.span));
                }
                self.call(callee, argv, kwv, e.span)?
            }
            ExprKind::List(items) => {
                let mut out = Vec::with_capacity(items.len());
                for it in items {
                    out.push(self.eval(it, locals)?);
                }
                Value::list(out)
            }
            ExprKind::Index { object, index } => {
                let obj = self.eval(object, locals)?;
                let idx = self.eval(index, locals)?;
                match &obj {
                    Value::List(items) => {
                        let items = items.borrow();
                        let i = self.list_index(items.len(), &idx, index.span)?;
                        items[i].clone()
                    }
                    _ => return type_error(object.span, format!("{} is not indexable", obj.type_name())),
                }
            }
            ExprKind::Unary { op, operand } => {
                let v = self.eval(operand, locals)?;
                match op {
                    UnaryOp::Not => Value::Bool(!v.truthy()),
                    UnaryOp::Neg | UnaryOp::Pos => match as_number(&v) {
                        Some(x) => Value::Number(if *op == UnaryOp::Neg { -x } else { x }),
                        None => return type_error(e.span, format!("bad operand type for unary minus: {}", v.type_name())),
                    },
                }
            }
            ExprKind::Binary { op, left, right } => {
                let a = self.eval(left, locals)?;
                let b = self.eval(right, locals)?;
                self.binary(*op, a, b, e.span)?
            }
            ExprKind::Compare { first, rest } => {
                let mut left = self.eval(first, locals)?;
                for (op, rhs) in rest {
                    let right = self.eval(rhs, locals)?;
                    if !self.compare(*op, &left, &right, e.span)? {
                        return Ok(Value::Bool(false));
                    }
                    left = right;
                }
                Value::Bool(true)
            }
            ExprKind::Logic { op, left, right } => {
                let a = self.eval(left, locals)?;
                match (op, a.truthy()) {
                    (BoolOp::And, false) | (BoolOp::Or, true) => a,
                    _ => self.eval(right, locals)?,
                }
            }
            ExprKind::Conditional { cond, then, otherwise } => {
                if self.eval(cond, locals)?.truthy() {
                    self.eval(then, locals)?
                } else {
                    self.eval(otherwise, locals)?
                }
            }
        })
    }

    fn call(
        &mut self,
        callee: Value,
        args: Vec<(Value, Span)>,
        kwargs: Vec<(String, Value, Span)>,
        span: Span,
    ) -> EResult<Value> {
        match callee {
            Value::Function(f) => self.call_user(&f, args, kwargs, span),
            Value::Builtin(name) => builtins::call(self, name, None, args, kwargs, span),
            Value::Method(recv, name) => builtins::call(self, name, Some(*recv), args, kwargs, span),
            other => type_error(span, format!("{} is not callable", other.type_name())),
        }
    }

    fn call_user(
        &mut self,
        f: &FunctionDef,
        args: Vec<(Value, Span)>,
        kwargs: Vec<(String, Value, Span)>,
        span: Span,
    ) -> EResult<Value> {
        if self.depth >= self.opts.limits.max_depth {
            return Err(FrontendError::DepthLimit { span, limit: self.opts.limits.max_depth });
        }
        if args.len() > f.params.len() {
            return type_error(span, format!("{}() takes {} arguments but {} were given", f.name, f.params.len(), args.len()));
        }
        let mut bound: Vec<Option<Value>> = vec![None; f.params.len()];
        for (i, (v, _)) in args.into_iter().enumerate() {
            bound[i] = Some(v);
        }
        for (name, v, kspan) in kwargs {
            let Some(i) = f.params.iter().position(|p| p.name == name) else {
                return type_error(kspan, format!("{}() got an unexpected keyword argument '{name}'", f.name));
            };
            if bound[i].is_some() {
                return type_error(kspan, format!("{}() got multiple values for argument '{name}'", f.name));
            }
            bound[i] = Some(v);
        }
        let mut env = Env::new();
        for (p, b) in f.params.iter().zip(bound) {
            let v = match (b, &p.default) {
                (Some(v), _) => v,
                (None, Some(d)) => self.eval(d, &mut None)?,
                (None, None) => return type_error(span, format!("{}() missing argument '{}'", f.name, p.name)),
            };
            env.insert(p.name.clone(), v);
        }
        self.depth += 1;
        let mut locals = Some(env);
        let flow = self.exec_block(&f.body, &mut locals);
        self.depth -= 1;
        Ok(match flow? {
            Flow::Return(v) => v,
            Flow::Normal => Value::None,
        })
    }
}

pub fn evaluate(ast: &Ast, overrides: &BTreeMap<String, f64>) -> Result<StructureIR, FrontendError> {
    evaluate_with(ast, overrides, &EvalOptions::default())
}

/// Run the module body, then call the entry point with defaults replaced by `overrides`.
pub fn evaluate_with(
    ast: &Ast,
    overrides: &BTreeMap<String, f64>,
    opts: &EvalOptions,
) -> Result<StructureIR, FrontendError> {
    let params = list_params(ast)?;
    let declared: Vec<String> = params.iter().map(|p| p.name.clone()).collect();
    if let Some(name) = overrides.keys().find(|k| !declared.contains(k)) {
        return Err(FrontendError::UnknownParameter { name: name.clone(), declared });
    }
    let mut interp = Interp::new(opts);
    interp.exec_block(&ast.body, &mut None)?;
    let entry = ast.entry();
    let kwargs = params
        .iter()
        .zip(&entry.params)
        .map(|(p, decl)| {
            let v = overrides.get(&p.name).copied().unwrap_or(p.default);
            (p.name.clone(), Value::Number(v), decl.span)
        })
        .collect();
    let result = interp.call_user(entry, Vec::new(), kwargs, entry.span)?;
    match result {
        Value::Structure(s) => Ok(Rc::try_unwrap(s).unwrap_or_else(|rc| (*rc).clone())),
        other => type_error(entry.span, format!("{ENTRY_POINT} must return a Structure, got {}", other.type_name())),
    }
}
