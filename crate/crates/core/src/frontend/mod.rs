//! Lexing, parsing and interpretation of metamaterial programs.

mod ast;
mod builtins;
mod interp;
mod lexer;
mod parser;
mod value;

pub use ast::{Ast, BinOp, BoolOp, CmpOp, Expr, ExprKind, FunctionDef, Keyword, Param, Span, Stmt, StmtKind, Target, UnaryOp};
pub use interp::{evaluate, evaluate_with, EvalLimits, EvalOptions};
pub use lexer::{tokenize, Tok, Token};
pub use parser::parse_program;
pub use value::Value;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assembly::{AssemblyError, StructureIR};
use crate::cp_core::CpError;
use crate::lifting::LiftError;

/// Reference programs shipped with the library.
pub mod examples {
    pub const SCHWARZ_P: &str = include_str!("../../assets/programs/schwarz_p.py");
    pub const PENTAMODE: &str = include_str!("../../assets/programs/pentamode.py");
}

/// Plain-text reference of the language's library, as given to program authors.
pub const API_DESCRIPTION: &str = include_str!("../../assets/api_description.txt");

pub const ENTRY_POINT: &str = "make_structure";
pub const DEFAULT_MAX_DEPTH: usize = 64;
pub const DEFAULT_MAX_STEPS: u64 = 1_000_000;

/// Failure reported by a library operation called from a program.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ApiError {
    #[error(transparent)]
    Cp(#[from] CpError),
    #[error(transparent)]
    Lift(#[from] LiftError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FrontendError {
    #[error("syntax error: expected {expected}, found {found}")]
    Syntax { span: Span, expected: String, found: String },
    #[error("type error: {message}")]
    Type { span: Span, message: String },
    #[error("name error: '{name}' is not defined{}", suggestion_text(.suggestions))]
    Name { span: Span, name: String, suggestions: Vec<String> },
    #[error("value error: {message}")]
    Value { span: Span, message: String },
    #[error("recursion deeper than {limit} calls")]
    DepthLimit { span: Span, limit: usize },
    #[error("evaluation exceeded {limit} steps")]
    StepLimit { span: Span, limit: u64 },
    #[error("parameter '{name}' of {ENTRY_POINT} has no default value")]
    MissingDefault { span: Span, name: String },
    #[error("unknown parameter '{name}' (declared: {})", .declared.join(", "))]
    UnknownParameter { name: String, declared: Vec<String> },
    #[error("in call to {callee}: {source}")]
    Api { span: Span, callee: String, source: ApiError },
}

fn suggestion_text(s: &[String]) -> String {
    if s.is_empty() {
        String::new()
    } else {
        format!("; did you mean {}?", s.join(", "))
    }
}

impl FrontendError {
    pub fn span(&self) -> Option<Span> {
        match self {
            FrontendError::Syntax { span, .. }
            | FrontendError::Type { span, .. }
            | FrontendError::Name { span, .. }
            | FrontendError::Value { span, .. }
            | FrontendError::DepthLimit { span, .. }
            | FrontendError::StepLimit { span, .. }
            | FrontendError::MissingDefault { span, .. }
            | FrontendError::Api { span, .. } => Some(*span),
            FrontendError::UnknownParameter { .. } => None,
        }
    }

    pub fn to_diagnostic(&self) -> Diagnostic {
        Diagnostic { severity: Severity::Error, span: self.span(), message: self.to_string() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Severity {
    Error,
    Warning,
    Note,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Note => "note",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub span: Option<Span>,
    pub message: String,
}

impl Diagnostic {
    /// `file:line:col: severity: message`
    pub fn render(&self, file: &str) -> String {
        let (line, col) = self.span.map_or((1, 1), |s| (s.line, s.col));
        format!("{file}:{line}:{col}: {}: {}", self.severity.as_str(), self.message)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub default: f64,
    pub declared_order: usize,
}

/// Program text split into its optional leading header block and the code body.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceProgram {
    pub raw_text: String,
    /// Contents between the triple single quotes, if the text starts with a header block.
    pub header: Option<String>,
    pub body: String,
}

impl SourceProgram {
    pub fn new(text: &str) -> Self {
        let trimmed = text.trim_start();
        if let Some(rest) = trimmed.strip_prefix("'''") {
            if let Some(end) = rest.find("'''") {
                let header = rest[..end].to_string();
                let body = rest[end + 3..].trim_start_matches(['\r', '\n']).to_string();
                return SourceProgram { raw_text: text.to_string(), header: Some(header), body };
            }
        }
        SourceProgram { raw_text: text.to_string(), header: None, body: text.to_string() }
    }
}

/// Parameters of the entry point in declaration order; defaults must be numeric constants.
pub fn list_params(ast: &Ast) -> Result<Vec<ParamSpec>, FrontendError> {
    ast.entry()
        .params
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let Some(d) = &p.default else {
                return Err(FrontendError::MissingDefault { span: p.span, name: p.name.clone() });
            };
            let default = interp::constant_number(d)?;
            Ok(ParamSpec { name: p.name.clone(), default, declared_order: i })
        })
        .collect()
}

/// Parse and evaluate in one step.
pub fn compile_program(text: &str, overrides: &BTreeMap<String, f64>) -> Result<StructureIR, FrontendError> {
    evaluate(&parse_program(text)?, overrides)
}
