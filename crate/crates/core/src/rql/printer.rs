use std::fmt::Write;

use super::ast::*;

/// Canonical source text: ASCII arrows and lambdas, single-quoted strings,
/// one statement per line, minimal parentheses.
pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for (i, s) in p.stmts.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        match s {
            Stmt::FunDef { name, params, body } => {
                out.push_str(name);
                for p in params {
                    out.push(' ');
                    out.push_str(p);
                }
                out.push_str(" := ");
                expr(&mut out, body, 0);
            }
            Stmt::Expr(e) => expr(&mut out, e, 0),
        }
    }
    out
}

pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    expr(&mut out, e, 0);
    out
}

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Lambda { .. } => 0,
        Expr::BinOp { op, .. } => op.precedence(),
        Expr::Apply { .. } => 4,
        Expr::Builtin { args, .. } if !args.is_empty() => 4,
        _ => 5,
    }
}

pub fn quote(s: &str) -> String {
    let mut q = String::with_capacity(s.len() + 2);
    q.push('\'');
    for c in s.chars() {
        if c == '\'' || c == '\\' {
            q.push('\\');
        }
        q.push(c);
    }
    q.push('\'');
    q
}

fn expr(out: &mut String, e: &Expr, min: u8) {
    if precedence(e) < min {
        out.push('(');
        expr(out, e, 0);
        out.push(')');
        return;
    }
    match e {
        Expr::Var(v) => out.push_str(v),
        Expr::Str(s) => out.push_str(&quote(s)),
        Expr::Num(n) => {
            let _ = write!(out, "{n}");
        }
        Expr::Fetch(p) => {
            out.push_str("fetch ");
            pattern(out, p);
        }
        Expr::Lambda { params, body } => {
            out.push('\\');
            match params {
                Params::Names(names) => out.push_str(&names.join(" ")),
                Params::Tuple(names) => {
                    out.push('(');
                    out.push_str(&names.join(", "));
                    out.push(')');
                }
            }
            out.push_str(" -> ");
            expr(out, body, 0);
        }
        Expr::Apply { func, args } => {
            expr(out, func, 5);
            for a in args {
                out.push(' ');
                expr(out, a, 5);
            }
        }
        Expr::Builtin { name, args } => {
            out.push_str(name.name());
            for a in args {
                out.push(' ');
                expr(out, a, 5);
            }
        }
        Expr::BinOp { op, lhs, rhs } => {
            let p = op.precedence();
            expr(out, lhs, p);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            expr(out, rhs, p + 1);
        }
    }
}

pub fn print_pattern(p: &Pattern) -> String {
    let mut out = String::new();
    pattern(&mut out, p);
    out
}

fn pattern(out: &mut String, p: &Pattern) {
    for (i, n) in p.nodes.iter().enumerate() {
        if i > 0 {
            out.push_str("->");
            match &p.edges[i - 1] {
                EdgePat::Labeled(l) => {
                    out.push('[');
                    out.push_str(&quote(l));
                    out.push(']');
                }
                EdgePat::Edge(v) => {
                    let _ = write!(out, "[{v}]");
                }
                EdgePat::Star(v) => {
                    let _ = write!(out, "[{v} *]");
                }
            }
            out.push_str("->");
        }
        out.push('(');
        if let Some(v) = &n.var {
            out.push_str(v);
        }
        if !n.props.is_empty() {
            out.push('{');
            for (j, (k, v)) in n.props.iter().enumerate() {
                if j > 0 {
                    out.push_str(", ");
                }
                out.push_str(k);
                out.push(':');
                match v {
                    PropValue::Str(s) => out.push_str(&quote(s)),
                    PropValue::Param(x) => out.push_str(x),
                }
            }
            out.push('}');
        }
        out.push(')');
    }
}
