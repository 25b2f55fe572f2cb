use serde::{Deserialize, Serialize};

/// Source location: 1-based line and column (in characters) plus the byte range.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub line: usize,
    pub col: usize,
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn to(self, other: Span) -> Span {
        Span { end: other.end.max(self.end), ..self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    FloorDiv,
    Mod,
    Pow,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::FloorDiv => "//",
            BinOp::Mod => "%",
            BinOp::Pow => "**",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnaryOp {
    Neg,
    Pos,
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoolOp {
    And,
    Or,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Keyword {
    pub name: String,
    pub value: Expr,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ExprKind {
    Number { value: f64, integral: bool },
    Str(String),
    Bool(bool),
    None,
    Name(String),
    Attribute { object: Box<Expr>, name: String },
    Call { func: Box<Expr>, args: Vec<Expr>, keywords: Vec<Keyword> },
    List(Vec<Expr>),
    Index { object: Box<Expr>, index: Box<Expr> },
    Unary { op: UnaryOp, operand: Box<Expr> },
    Binary { op: BinOp, left: Box<Expr>, right: Box<Expr> },
    /// Chained comparison `a < b <= c`.
    Compare { first: Box<Expr>, rest: Vec<(CmpOp, Expr)> },
    Logic { op: BoolOp, left: Box<Expr>, right: Box<Expr> },
    /// `a if cond else b`
    Conditional { cond: Box<Expr>, then: Box<Expr>, otherwise: Box<Expr> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Param {
    pub name: String,
    pub default: Option<Expr>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionDef {
    pub name: String,
    pub params: Vec<Param>,
    pub body: Vec<Stmt>,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Target {
    Name(String),
    Index { object: Box<Expr>, index: Box<Expr> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum StmtKind {
    /// `from metagen import *`
    Import,
    Def(FunctionDef),
    Assign { target: Target, value: Expr },
    AugAssign { target: String, op: BinOp, value: Expr },
    Expr(Expr),
    Return(Option<Expr>),
    For { var: String, iter: Expr, body: Vec<Stmt> },
    /// `if`/`elif` arms in order, then the optional `else` block.
    If { arms: Vec<(Expr, Vec<Stmt>)>, otherwise: Vec<Stmt> },
    Pass,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

/// A parsed program: module-level statements, with exactly one `make_structure` definition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ast {
    pub body: Vec<Stmt>,
}

impl Ast {
    pub fn functions(&self) -> impl Iterator<Item = &FunctionDef> {
        self.body.iter().filter_map(|s| match &s.kind {
            StmtKind::Def(f) => Some(f),
            _ => None,
        })
    }

    pub fn entry(&self) -> &FunctionDef {
        self.functions().find(|f| f.name == super::ENTRY_POINT).expect("parser guarantees an entry point")
    }

    /// Copy with every span zeroed, for structural comparison.
    pub fn without_spans(&self) -> Ast {
        let mut ast = self.clone();
        ast.body.iter_mut().for_each(|s| walk_stmt(s, &mut |sp| *sp = Span::default()));
        ast
    }

    /// Every span in the tree.
    pub fn spans(&self) -> Vec<Span> {
        let mut out = Vec::new();
        let mut copy = self.clone();
        copy.body.iter_mut().for_each(|s| walk_stmt(s, &mut |sp| out.push(*sp)));
        out
    }
}

fn walk_stmt(s: &mut Stmt, f: &mut dyn FnMut(&mut Span)) {
    f(&mut s.span);
    match &mut s.kind {
        StmtKind::Def(d) => {
            f(&mut d.span);
            for p in &mut d.params {
                f(&mut p.span);
                if let Some(e) = &mut p.default {
                    walk_expr(e, f);
                }
            }
            d.body.iter_mut().for_each(|s| walk_stmt(s, f));
        }
        StmtKind::Assign { target, value } => {
            if let Target::Index { object, index } = target {
                walk_expr(object, f);
                walk_expr(index, f);
            }
            walk_expr(value, f);
        }
        StmtKind::AugAssign { value, .. } | StmtKind::Expr(value) | StmtKind::Return(Some(value)) => walk_expr(value, f),
        StmtKind::For { iter, body, .. } => {
            walk_expr(iter, f);
            body.iter_mut().for_each(|s| walk_stmt(s, f));
        }
        StmtKind::If { arms, otherwise } => {
            for (c, b) in arms {
                walk_expr(c, f);
                b.iter_mut().for_each(|s| walk_stmt(s, f));
            }
            otherwise.iter_mut().for_each(|s| walk_stmt(s, f));
        }
        StmtKind::Import | StmtKind::Return(None) | StmtKind::Pass => {}
    }
}

fn walk_expr(e: &mut Expr, f: &mut dyn FnMut(&mut Span)) {
    f(&mut e.span);
    match &mut e.kind {
        ExprKind::Attribute { object, .. } => walk_expr(object, f),
        ExprKind::Call { func, args, keywords } => {
            walk_expr(func, f);
            args.iter_mut().for_each(|a| walk_expr(a, f));
            keywords.iter_mut().for_each(|k| walk_expr(&mut k.value, f));
        }
        ExprKind::List(items) => items.iter_mut().for_each(|a| walk_expr(a, f)),
        ExprKind::Index { object, index } => {
            walk_expr(object, f);
            walk_expr(index, f);
        }
        ExprKind::Unary { operand, .. } => walk_expr(operand, f),
        ExprKind::Binary { left, right, .. } | ExprKind::Logic { left, right, .. } => {
            walk_expr(left, f);
            walk_expr(right, f);
        }
        ExprKind::Compare { first, rest } => {
            walk_expr(first, f);
            rest.iter_mut().for_each(|(_, e)| walk_expr(e, f));
        }
        ExprKind::Conditional { cond, then, otherwise } => {
            walk_expr(cond, f);
            walk_expr(then, f);
            walk_expr(otherwise, f);
        }
        _ => {}
    }
}
