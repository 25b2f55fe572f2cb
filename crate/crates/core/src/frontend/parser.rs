//! Recursive-descent parser for the supported Python subset.

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::{FrontendError, ENTRY_POINT};

/// Keywords of full Python that the subset rejects with a targeted message.
const UNSUPPORTED: [&str; 14] = [
    "while", "class", "lambda", "import", "with", "try", "except", "finally", "raise", "yield", "global", "nonlocal",
    "del", "assert",
];
const RESERVED: [&str; 14] =
    ["def", "return", "for", "in", "if", "elif", "else", "from", "pass", "and", "or", "not", "is", "break"];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, FrontendError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        Err(FrontendError::Syntax { span: self.span(), expected: expected.into(), found: self.peek().describe() })
    }

    fn is_op(&self, op: &str) -> bool {
        matches!(self.peek(), Tok::Op(o) if *o == op)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Name(n) if n == kw)
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if self.is_op(op) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, op: &str) -> PResult<Span> {
        if self.is_op(op) {
            Ok(self.bump().span)
        } else {
            self.error(&format!("'{op}'"))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<Span> {
        if self.is_kw(kw) {
            Ok(self.bump().span)
        } else {
            self.error(&format!("'{kw}'"))
        }
    }

    fn identifier(&mut self, what: &str) -> PResult<(String, Span)> {
        match self.peek().clone() {
            Tok::Name(n) if !RESERVED.contains(&n.as_str()) && !UNSUPPORTED.contains(&n.as_str()) => {
                let t = self.bump();
                Ok((n, t.span))
            }
            _ => self.error(what),
        }
    }

    fn expect_newline(&mut self) -> PResult<()> {
        match self.peek() {
            Tok::Newline => {
                self.bump();
                Ok(())
            }
            Tok::Eof => Ok(()),
            _ => self.error("end of line"),
        }
    }

    fn module(&mut self) -> PResult<Ast> {
        let mut body = Vec::new();
        while *self.peek() != Tok::Eof {
            if *self.peek() == Tok::Newline {
                self.bump();
                continue;
            }
            body.push(self.statement()?);
        }
        let entries = body.iter().filter(|s| matches!(&s.kind, StmtKind::Def(f) if f.name == ENTRY_POINT)).count();
        if entries != 1 {
            let span = if entries == 0 { Span { line: 1, col: 1, start: 0, end: 0 } } else { self.span() };
            let found = if entries == 0 { "no definition".to_string() } else { format!("{entries} definitions") };
            return Err(FrontendError::Syntax {
                span,
                expected: format!("exactly one 'def {ENTRY_POINT}(...)'"),
                found,
            });
        }
        Ok(Ast { body })
    }

    fn block(&mut self) -> PResult<Vec<Stmt>> {
        self.expect_op(":")?;
        if *self.peek() != Tok::Newline {
            let s = self.simple_statement()?;
            return Ok(vec![s]);
        }
        self.bump();
        if *self.peek() != Tok::Indent {
            return self.error("an indented block");
        }
        self.bump();
        let mut body = Vec::new();
        while !matches!(self.peek(), Tok::Dedent | Tok::Eof) {
            if *self.peek() == Tok::Newline {
                self.bump();
                continue;
            }
            body.push(self.statement()?);
        }
        if *self.peek() == Tok::Dedent {
            self.bump();
        }
        Ok(body)
    }

    fn statement(&mut self) -> PResult<Stmt> {
        let start = self.span();
        if let Tok::Name(n) = self.peek().clone() {
            match n.as_str() {
                "def" => return self.function_def(),
                "for" => {
                    self.bump();
                    let (var, _) = self.identifier("a loop variable name")?;
                    self.expect_kw("in")?;
                    let iter = self.expression()?;
                    let body = self.block()?;
                    return Ok(Stmt { kind: StmtKind::For { var, iter, body }, span: start.to(self.prev_span()) });
                }
                "if" => {
                    self.bump();
                    let mut arms = vec![(self.expression()?, self.block()?)];
                    let mut otherwise = Vec::new();
                    loop {
                        while *self.peek() == Tok::Newline {
                            self.bump();
                        }
                        if self.eat_kw("elif") {
                            arms.push((self.expression()?, self.block()?));
                        } else {
                            if self.eat_kw("else") {
                                otherwise = self.block()?;
                            }
                            break;
                        }
                    }
                    return Ok(Stmt { kind: StmtKind::If { arms, otherwise }, span: start.to(self.prev_span()) });
                }
                _ => {}
            }
        }
        self.simple_statement()
    }

    fn simple_statement(&mut self) -> PResult<Stmt> {
        let start = self.span();
        let kind = match self.peek().clone() {
            Tok::Name(n) if n == "from" => {
                self.bump();
                if !self.eat_kw("metagen") {
                    return self.error("'metagen' (only 'from metagen import *' is supported)");
                }
                self.expect_kw("import")?;
                self.expect_op("*")?;
                StmtKind::Import
            }
            Tok::Name(n) if n == "pass" => {
                self.bump();
                StmtKind::Pass
            }
            Tok::Name(n) if n == "return" => {
                self.bump();
                if matches!(self.peek(), Tok::Newline | Tok::Eof) {
                    StmtKind::Return(None)
                } else {
                    StmtKind::Return(Some(self.expression()?))
                }
            }
            Tok::Name(n) if n == "import" => return self.error("'from metagen import *'"),
            Tok::Name(n) if UNSUPPORTED.contains(&n.as_str()) || n == "break" || n == "continue" => {
                return self.error("a supported statement");
            }
            Tok::Name(n) if n == "else" || n == "elif" => return self.error("a statement"),
            _ => {
                let e = self.expression()?;
                if self.is_op("=") {
                    self.bump();
                    let target = match e.kind {
                        ExprKind::Name(n) => Target::Name(n),
                        ExprKind::Index { object, index } => Target::Index { object, index },
                        _ => {
                            return Err(FrontendError::Syntax {
                                span: e.span,
                                expected: "a name or list element to assign".into(),
                                found: "expression".into(),
                            })
                        }
                    };
                    let value = self.expression()?;
                    StmtKind::Assign { target, value }
                } else if let Some(op) = self.aug_op() {
                    let ExprKind::Name(target) = e.kind else {
                        return Err(FrontendError::Syntax {
                            span: e.span,
                            expected: "a name before an augmented assignment".into(),
                            found: "expression".into(),
                        });
                    };
                    self.bump();
                    let value = self.expression()?;
                    StmtKind::AugAssign { target, op, value }
                } else {
                    StmtKind::Expr(e)
                }
            }
        };
        let span = start.to(self.prev_span());
        self.expect_newline()?;
        Ok(Stmt { kind, span })
    }

    fn aug_op(&self) -> Option<BinOp> {
        let Tok::Op(o) = self.peek() else { return None };
        Some(match *o {
            "+=" => BinOp::Add,
            "-=" => BinOp::Sub,
            "*=" => BinOp::Mul,
            "/=" => BinOp::Div,
            "//=" => BinOp::FloorDiv,
            "%=" => BinOp::Mod,
            "**=" => BinOp::Pow,
            _ => return None,
        })
    }

    fn function_def(&mut self) -> PResult<Stmt> {
        let start = self.expect_kw("def")?;
        let (name, _) = self.identifier("a function name")?;
        self.expect_op("(")?;
        let mut params: Vec<Param> = Vec::new();
        while !self.is_op(")") {
            if self.is_op("*") {
                return self.error("a parameter name (variadic parameters are not supported)");
            }
            let (pname, pspan) = self.identifier("a parameter name")?;
            if params.iter().any(|p| p.name == pname) {
                return Err(FrontendError::Syntax {
                    span: pspan,
                    expected: "a unique parameter name".into(),
                    found: format!("duplicate '{pname}'"),
                });
            }
            if self.eat_op(":") {
                self.annotation()?;
            }
            let default = if self.eat_op("=") { Some(self.expression()?) } else { None };
            params.push(Param { name: pname, default, span: pspan.to(self.prev_span()) });
            if !self.eat_op(",") {
                break;
            }
        }
        self.expect_op(")")?;
        if self.eat_op("->") {
            self.annotation()?;
        }
        let header_end = self.prev_span();
        let body = self.block()?;
        let def = FunctionDef { name, params, body, span: start.to(header_end) };
        Ok(Stmt { kind: StmtKind::Def(def), span: start.to(self.prev_span()) })
    }

    /// Type annotations are parsed and ignored.
    fn annotation(&mut self) -> PResult<()> {
        self.postfix().map(|_| ())
    }

    fn expression(&mut self) -> PResult<Expr> {
        let then = self.or_expr()?;
        if self.is_kw("if") {
            self.bump();
            let cond = self.or_expr()?;
            self.expect_kw("else")?;
            let otherwise = self.expression()?;
            let span = then.span.to(otherwise.span);
            return Ok(Expr {
                kind: ExprKind::Conditional { cond: Box::new(cond), then: Box::new(then), otherwise: Box::new(otherwise) },
                span,
            });
        }
        Ok(then)
    }

    fn or_expr(&mut self) -> PResult<Expr> {
        let mut left = self.and_expr()?;
        while self.eat_kw("or") {
            let right = self.and_expr()?;
            left = logic(BoolOp::Or, left, right);
        }
        Ok(left)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut left = self.not_expr()?;
        while self.eat_kw("and") {
            let right = self.not_expr()?;
            left = logic(BoolOp::And, left, right);
        }
        Ok(left)
    }

    fn not_expr(&mut self) -> PResult<Expr> {
        if self.is_kw("not") {
            let start = self.bump().span;
            let operand = self.not_expr()?;
            let span = start.to(operand.span);
            return Ok(Expr { kind: ExprKind::Unary { op: UnaryOp::Not, operand: Box::new(operand) }, span });
        }
        self.comparison()
    }

    fn cmp_op(&self) -> Option<CmpOp> {
        let Tok::Op(o) = self.peek() else { return None };
        Some(match *o {
            "==" => CmpOp::Eq,
            "!=" => CmpOp::Ne,
            "<" => CmpOp::Lt,
            "<=" => CmpOp::Le,
            ">" => CmpOp::Gt,
            ">=" => CmpOp::Ge,
            _ => return None,
        })
    }

    fn comparison(&mut self) -> PResult<Expr> {
        let first = self.arith()?;
        let mut rest = Vec::new();
        while let Some(op) = self.cmp_op() {
            self.bump();
            rest.push((op, self.arith()?));
        }
        if rest.is_empty() {
            return Ok(first);
        }
        let span = first.span.to(rest.last().expect("non-empty").1.span);
        Ok(Expr { kind: ExprKind::Compare { first: Box::new(first), rest }, span })
    }

    fn arith(&mut self) -> PResult<Expr> {
        let mut left = self.term()?;
        loop {
            let op = if self.is_op("+") {
                BinOp::Add
            } else if self.is_op("-") {
                BinOp::Sub
            } else {
                return Ok(left);
            };
            self.bump();
            let right = self.term()?;
            left = binary(op, left, right);
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut left = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op("*") => BinOp::Mul,
                Tok::Op("/") => BinOp::Div,
                Tok::Op("//") => BinOp::FloorDiv,
                Tok::Op("%") => BinOp::Mod,
                _ => return Ok(left),
            };
            self.bump();
            let right = self.unary()?;
            left = binary(op, left, right);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        let op = match self.peek() {
            Tok::Op("-") => UnaryOp::Neg,
            Tok::Op("+") => UnaryOp::Pos,
            _ => return self.power(),
        };
        let start = self.bump().span;
        let operand = self.unary()?;
        let span = start.to(operand.span);
        Ok(Expr { kind: ExprKind::Unary { op, operand: Box::new(operand) }, span })
    }

    fn power(&mut self) -> PResult<Expr> {
        let base = self.postfix()?;
        if self.eat_op("**") {
            // Right associative and binds tighter than a unary minus on its left.
            let exp = self.unary()?;
            return Ok(binary(BinOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.atom()?;
        loop {
            if self.eat_op(".") {
                let (name, nspan) = match self.peek().clone() {
                    Tok::Name(n) => (n, self.bump().span),
                    _ => return self.error("an attribute name"),
                };
                let span = e.span.to(nspan);
                e = Expr { kind: ExprKind::Attribute { object: Box::new(e), name }, span };
            } else if self.is_op("(") {
                self.bump();
                let (args, keywords) = self.arguments()?;
                let close = self.expect_op(")")?;
                let span = e.span.to(close);
                e = Expr { kind: ExprKind::Call { func: Box::new(e), args, keywords }, span };
            } else if self.is_op("[") {
                self.bump();
                let index = self.expression()?;
                if self.is_op(":") {
                    return self.error("']' (slices are not supported)");
                }
                let close = self.expect_op("]")?;
                let span = e.span.to(close);
                e = Expr { kind: ExprKind::Index { object: Box::new(e), index: Box::new(index) }, span };
            } else {
                return Ok(e);
            }
        }
    }

    fn arguments(&mut self) -> PResult<(Vec<Expr>, Vec<Keyword>)> {
        let mut args = Vec::new();
        let mut keywords: Vec<Keyword> = Vec::new();
        while !self.is_op(")") {
            if self.is_op("*") || self.is_op("**") {
                return self.error("an argument (unpacking is not supported)");
            }
            let is_keyword = matches!(self.peek(), Tok::Name(_))
                && matches!(self.toks.get(self.pos + 1).map(|t| &t.tok), Some(Tok::Op("=")));
            if is_keyword {
                let (name, nspan) = self.identifier("a keyword name")?;
                self.bump();
                if keywords.iter().any(|k| k.name == name) {
                    return Err(FrontendError::Syntax {
                        span: nspan,
                        expected: "distinct keyword arguments".into(),
                        found: format!("repeated '{name}'"),
                    });
                }
                keywords.push(Keyword { name, value: self.expression()? });
            } else {
                if !keywords.is_empty() {
                    return self.error("a keyword argument (positional arguments must come first)");
                }
                args.push(self.expression()?);
            }
            if self.is_kw("for") {
                return self.error("',' or ')' (comprehensions are not supported)");
            }
            if !self.eat_op(",") {
                break;
            }
        }
        Ok((args, keywords))
    }

    fn sequence(&mut self, close: &str) -> PResult<Vec<Expr>> {
        let mut items = Vec::new();
        while !self.is_op(close) {
            items.push(self.expression()?);
            if self.is_kw("for") {
                return self.error(&format!("',' or '{close}' (comprehensions are not supported)"));
            }
            if !self.eat_op(",") {
                break;
            }
        }
        Ok(items)
    }

    fn atom(&mut self) -> PResult<Expr> {
        let start = self.span();
        let kind = match self.peek().clone() {
            Tok::Number { value, integral } => {
                self.bump();
                ExprKind::Number { value, integral }
            }
            Tok::Str(s) => {
                self.bump();
                let mut s = s;
                // Adjacent literals concatenate.
                while let Tok::Str(more) = self.peek().clone() {
                    self.bump();
                    s.push_str(&more);
                }
                ExprKind::Str(s)
            }
            Tok::Name(n) if n == "True" || n == "False" => {
                self.bump();
                ExprKind::Bool(n == "True")
            }
            Tok::Name(n) if n == "None" => {
                self.bump();
                ExprKind::None
            }
            Tok::Name(n) if n == "lambda" => return self.error("an expression (lambdas are not supported)"),
            Tok::Name(_) => {
                let (n, _) = self.identifier("an expression")?;
                ExprKind::Name(n)
            }
            Tok::Op("[") => {
                self.bump();
                let items = self.sequence("]")?;
                self.expect_op("]")?;
                ExprKind::List(items)
            }
            Tok::Op("(") => {
                self.bump();
                if self.eat_op(")") {
                    ExprKind::List(Vec::new())
                } else {
                    let first = self.expression()?;
                    if self.is_kw("for") {
                        return self.error("')' (generator expressions are not supported)");
                    }
                    if self.eat_op(",") {
                        // Tuples behave as lists.
                        let mut items = vec![first];
                        items.extend(self.sequence(")")?);
                        self.expect_op(")")?;
                        ExprKind::List(items)
                    } else {
                        self.expect_op(")")?;
                        return Ok(Expr { span: start.to(self.prev_span()), ..first });
                    }
                }
            }
            Tok::Op("{") => return self.error("an expression (dictionaries and sets are not supported)"),
            _ => return self.error("an expression"),
        };
        Ok(Expr { kind, span: start.to(self.prev_span()) })
    }
}

fn binary(op: BinOp, left: Expr, right: Expr) -> Expr {
    let span = left.span.to(right.span);
    Expr { kind: ExprKind::Binary { op, left: Box::new(left), right: Box::new(right) }, span }
}

fn logic(op: BoolOp, left: Expr, right: Expr) -> Expr {
    let span = left.span.to(right.span);
    Expr { kind: ExprKind::Logic { op, left: Box::new(left), right: Box::new(right) }, span }
}

/// Parse program text (with or without a leading header block) into an [`Ast`].
pub fn parse_program(text: &str) -> Result<Ast, FrontendError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0 };
    let mut ast = p.module()?;
    // A leading string statement is the header block or a module docstring.
    ast.body.retain(|s| !matches!(&s.kind, StmtKind::Expr(Expr { kind: ExprKind::Str(_), .. })));
    Ok(ast)
}
