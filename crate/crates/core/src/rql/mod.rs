//! The query language: lexer, parser, canonical printer, and compilation of
//! fetch patterns into graph templates.
//!
//! ```text
//! program := stmt (SEP stmt)*
//! stmt    := IDENT (","? IDENT)* ":=" expr | expr
//! expr    := and ; and := cmp ("and" cmp)* ; cmp := mul (("="|">"|"<"|"in") mul)*
//! mul     := app ("*" app)* ; app := atom (atom | "(" expr ("," expr)* ")")*
//! atom    := "fetch" pattern | lambda | IDENT | STRING | NUMBER | "(" expr ")"
//! lambda  := ("λ"|"\") (IDENT+ | "(" IDENT ("," IDENT)* ")") ("->"|"→") expr
//! pattern := node ("->" edge "->" node)*
//! node    := "(" IDENT? ("{" IDENT ":" (STRING|IDENT) ("," ...)* "}")? ")"
//! edge    := "[" (STRING | IDENT "*"?) "]"
//! ```
//!
//! SEP is `;` or a line break at bracket depth zero that is not followed by an
//! indented line and does not follow an operator, `->`, `:=` or `,`.

mod ast;
mod lexer;
mod parser;
mod printer;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub use ast::*;
pub use lexer::{tokenize, Pos, Tok, Token};
pub use parser::{parse, parse_bytes, MAX_DEPTH};
pub use printer::{print_expr, print_pattern, print_program, quote};

use crate::graph::{NodeConstraint, Template, TemplateStep};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub expected: Vec<String>,
}

impl SyntaxError {
    pub fn new(pos: Pos, message: String, expected: Vec<String>) -> Self {
        Self {
            line: pos.line,
            column: pos.column,
            message,
            expected,
        }
    }
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "syntax error at line {}, column {}: {}", self.line, self.column, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(" or "))?;
        }
        Ok(())
    }
}

impl std::error::Error for SyntaxError {}

pub const PATTERN_KEYS: [&str; 4] = ["name", "handle", "type", "src"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("unknown node property '{0}' (allowed: name, handle, type, src)")]
    UnknownKey(String),
    #[error("property '{0}' given twice in one node pattern")]
    DuplicateKey(String),
    #[error("variable '{0}' is used for both an edge and a node")]
    MixedVariable(String),
}

/// A pattern whose constraint keys are checked; parameter-valued constraints
/// are filled in by [`CompiledPattern::instantiate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledPattern {
    template: Template,
    params: Vec<(usize, &'static str, String)>,
}

impl CompiledPattern {
    pub fn variables(&self) -> Vec<String> {
        self.template.variables()
    }

    /// Parameter names referenced by constraints, with their keys.
    pub fn params(&self) -> impl Iterator<Item = (&'static str, &str)> {
        self.params.iter().map(|(_, k, p)| (*k, p.as_str()))
    }

    pub fn instantiate<E>(&self, mut resolve: impl FnMut(&str, &str) -> Result<String, E>) -> Result<Template, E> {
        let mut t = self.template.clone();
        for (i, key, param) in &self.params {
            let v = resolve(key, param)?;
            let n = &mut t.nodes[*i];
            match *key {
                "name" => n.name = Some(v),
                "handle" => n.handle = Some(v),
                "type" => n.node_type = Some(v),
                _ => n.src = Some(v),
            }
        }
        Ok(t)
    }
}

pub fn compile_pattern(p: &Pattern) -> Result<CompiledPattern, PatternError> {
    let mut template = Template {
        nodes: Vec::with_capacity(p.nodes.len()),
        steps: Vec::with_capacity(p.edges.len()),
    };
    let mut params = Vec::new();
    for (i, n) in p.nodes.iter().enumerate() {
        let mut c = NodeConstraint {
            var: n.var.clone(),
            ..Default::default()
        };
        for (key, value) in &n.props {
            let key: &'static str = PATTERN_KEYS
                .into_iter()
                .find(|k| k == key)
                .ok_or_else(|| PatternError::UnknownKey(key.clone()))?;
            let slot = match key {
                "name" => &mut c.name,
                "handle" => &mut c.handle,
                "type" => &mut c.node_type,
                _ => &mut c.src,
            };
            if slot.is_some() || params.iter().any(|(j, k, _)| *j == i && *k == key) {
                return Err(PatternError::DuplicateKey(key.to_owned()));
            }
            match value {
                PropValue::Str(s) => *slot = Some(s.clone()),
                PropValue::Param(x) => params.push((i, key, x.clone())),
            }
        }
        template.nodes.push(c);
    }
    for e in &p.edges {
        template.steps.push(match e {
            EdgePat::Labeled(l) => TemplateStep::Labeled(l.clone()),
            EdgePat::Edge(v) => TemplateStep::Edge(v.clone()),
            EdgePat::Star(v) => TemplateStep::Star(v.clone()),
        });
    }
    let node_vars: Vec<&String> = p.nodes.iter().filter_map(|n| n.var.as_ref()).collect();
    for e in &p.edges {
        if let EdgePat::Edge(v) | EdgePat::Star(v) = e {
            if node_vars.contains(&v) {
                return Err(PatternError::MixedVariable(v.clone()));
            }
        }
    }
    Ok(CompiledPattern { template, params })
}
