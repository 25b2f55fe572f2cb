//! Indentation-aware tokenizer for the Python subset.

use super::ast::Span;
use super::FrontendError;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Name(String),
    Number { value: f64, integral: bool },
    Str(String),
    Op(&'static str),
    Newline,
    Indent,
    Dedent,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Name(n) => format!("'{n}'"),
            Tok::Number { value, .. } => format!("number {value}"),
            Tok::Str(_) => "string literal".into(),
            Tok::Op(o) => format!("'{o}'"),
            Tok::Newline => "end of line".into(),
            Tok::Indent => "indent".into(),
            Tok::Dedent => "dedent".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

/// Longest operators first so that `**` wins over `*`.
const OPERATORS: [&str; 31] = [
    "**=", "//=", "->", "**", "//", "==", "!=", "<=", ">=", "+=", "-=", "*=", "/=", "%=", "+", "-", "*", "/", "%",
    "<", ">", "=", "(", ")", "[", "]", "{", "}", ",", ":", ".",
];

struct Lexer<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    line: usize,
    line_start: usize,
    depth: usize,
    indents: Vec<usize>,
    out: Vec<Token>,
}

impl<'a> Lexer<'a> {
    fn span_at(&self, start: usize, line: usize, line_start: usize) -> Span {
        Span { line, col: self.src[line_start..start].chars().count() + 1, start, end: self.pos }
    }

    fn here(&self) -> Span {
        Span { line: self.line, col: self.src[self.line_start..self.pos].chars().count() + 1, start: self.pos, end: self.pos }
    }

    fn error(&self, expected: &str, found: &str) -> FrontendError {
        let s = self.here();
        FrontendError::Syntax { span: s, expected: expected.into(), found: found.into() }
    }

    fn push(&mut self, tok: Tok, start: usize, line: usize, line_start: usize) {
        let span = self.span_at(start, line, line_start);
        self.out.push(Token { tok, span });
    }

    fn newline(&mut self) {
        self.pos += 1;
        self.line += 1;
        self.line_start = self.pos;
    }

    /// Handles indentation at the start of a logical line; returns false for blank lines.
    fn indentation(&mut self) -> Result<bool, FrontendError> {
        let mut width = 0;
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b' ' => width += 1,
                b'\t' => width = (width / 8 + 1) * 8,
                b'\x0c' => width = 0,
                _ => break,
            }
            self.pos += 1;
        }
        match self.bytes.get(self.pos) {
            None => return Ok(false),
            Some(b'\n') | Some(b'#') => return Ok(false),
            Some(b'\r') if self.bytes.get(self.pos + 1) == Some(&b'\n') => return Ok(false),
            _ => {}
        }
        let current = *self.indents.last().expect("indent stack never empty");
        if width > current {
            self.indents.push(width);
            self.push(Tok::Indent, self.pos, self.line, self.line_start);
        } else {
            while width < *self.indents.last().expect("indent stack never empty") {
                self.indents.pop();
                self.push(Tok::Dedent, self.pos, self.line, self.line_start);
            }
            if width != *self.indents.last().expect("indent stack never empty") {
                return Err(self.error("indentation matching an enclosing block", "inconsistent dedent"));
            }
        }
        Ok(true)
    }

    fn number(&mut self) -> Result<Tok, FrontendError> {
        let start = self.pos;
        let mut integral = true;
        let digits = |l: &mut Self| {
            while l.pos < l.bytes.len() && (l.bytes[l.pos].is_ascii_digit() || l.bytes[l.pos] == b'_') {
                l.pos += 1;
            }
        };
        digits(self);
        if self.bytes.get(self.pos) == Some(&b'.') {
            integral = false;
            self.pos += 1;
            digits(self);
        }
        if matches!(self.bytes.get(self.pos), Some(b'e') | Some(b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.bytes.get(self.pos), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if self.bytes.get(self.pos).is_some_and(|b| b.is_ascii_digit()) {
                integral = false;
                digits(self);
            } else {
                self.pos = save;
            }
        }
        let text: String = self.src[start..self.pos].chars().filter(|&c| c != '_').collect();
        let value = text.parse::<f64>().map_err(|_| self.error("a number", &text))?;
        if self.bytes.get(self.pos).is_some_and(|b| b.is_ascii_alphabetic() || *b == b'_') {
            return Err(self.error("an operator after the number", "a name character"));
        }
        Ok(Tok::Number { value, integral })
    }

    fn string(&mut self) -> Result<Tok, FrontendError> {
        let quote = self.bytes[self.pos];
        let triple = self.bytes.get(self.pos + 1) == Some(&quote) && self.bytes.get(self.pos + 2) == Some(&quote);
        self.pos += if triple { 3 } else { 1 };
        let mut value = String::new();
        loop {
            let Some(&b) = self.bytes.get(self.pos) else {
                return Err(self.error("closing quote", "end of input"));
            };
            if triple {
                if b == quote && self.bytes.get(self.pos + 1) == Some(&quote) && self.bytes.get(self.pos + 2) == Some(&quote) {
                    self.pos += 3;
                    return Ok(Tok::Str(value));
                }
            } else if b == quote {
                self.pos += 1;
                return Ok(Tok::Str(value));
            } else if b == b'\n' {
                return Err(self.error("closing quote", "end of line"));
            }
            if b == b'\\' {
                let esc = self.bytes.get(self.pos + 1).copied();
                let c = match esc {
                    Some(b'n') => '\n',
                    Some(b't') => '\t',
                    Some(b'\\') => '\\',
                    Some(b'\'') => '\'',
                    Some(b'"') => '"',
                    Some(b'\n') => {
                        self.pos += 1;
                        self.newline();
                        continue;
                    }
                    _ => '\\',
                };
                value.push(c);
                self.pos += if c == '\\' && esc != Some(b'\\') { 1 } else { 2 };
                continue;
            }
            if b == b'\n' {
                value.push('\n');
                self.newline();
                continue;
            }
            let ch = self.src[self.pos..].chars().next().expect("inside input");
            value.push(ch);
            self.pos += ch.len_utf8();
        }
    }

    fn run(mut self) -> Result<Vec<Token>, FrontendError> {
        let mut at_line_start = true;
        while self.pos < self.bytes.len() {
            if at_line_start && self.depth == 0 {
                if !self.indentation()? {
                    // Blank or comment-only line.
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                    if self.pos < self.bytes.len() {
                        self.newline();
                    }
                    continue;
                }
                at_line_start = false;
            }
            let b = self.bytes[self.pos];
            let (start, line, line_start) = (self.pos, self.line, self.line_start);
            match b {
                b' ' | b'\t' | b'\r' | b'\x0c' => self.pos += 1,
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b'\\' if self.bytes.get(self.pos + 1) == Some(&b'\n') => {
                    self.pos += 1;
                    self.newline();
                }
                b'\n' => {
                    if self.depth == 0 {
                        self.push(Tok::Newline, start, line, line_start);
                        at_line_start = true;
                    }
                    self.newline();
                }
                b'0'..=b'9' => {
                    let t = self.number()?;
                    self.push(t, start, line, line_start);
                }
                b'.' if self.bytes.get(self.pos + 1).is_some_and(|c| c.is_ascii_digit()) => {
                    let t = self.number()?;
                    self.push(t, start, line, line_start);
                }
                b'\'' | b'"' => {
                    let t = self.string()?;
                    self.push(t, start, line, line_start);
                }
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    while self.pos < self.bytes.len() && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_') {
                        self.pos += 1;
                    }
                    let name = self.src[start..self.pos].to_string();
                    self.push(Tok::Name(name), start, line, line_start);
                }
                _ => {
                    let rest = &self.src[self.pos..];
                    let Some(op) = OPERATORS.iter().find(|o| rest.starts_with(**o)) else {
                        let ch = rest.chars().next().expect("inside input");
                        return Err(self.error("a token", &format!("character '{ch}'")));
                    };
                    self.pos += op.len();
                    match *op {
                        "(" | "[" | "{" => self.depth += 1,
                        ")" | "]" | "}" => self.depth = self.depth.saturating_sub(1),
                        _ => {}
                    }
                    self.push(Tok::Op(op), start, line, line_start);
                }
            }
        }
        let end = self.pos;
        if !matches!(self.out.last().map(|t| &t.tok), None | Some(Tok::Newline)) {
            self.push(Tok::Newline, end, self.line, self.line_start);
        }
        while self.indents.len() > 1 {
            self.indents.pop();
            self.push(Tok::Dedent, end, self.line, self.line_start);
        }
        self.push(Tok::Eof, end, self.line, self.line_start);
        Ok(self.out)
    }
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, FrontendError> {
    Lexer { src, bytes: src.as_bytes(), pos: 0, line: 1, line_start: 0, depth: 0, indents: vec![0], out: Vec::new() }.run()
}
