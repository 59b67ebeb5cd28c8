use std::collections::BTreeSet;

use super::ast::*;
use super::lexer::{tokenize, Pos, Tok, Token};
use super::SyntaxError;

/// Deepest expression nesting accepted before giving up.
pub const MAX_DEPTH: usize = 200;

pub fn parse(src: &str) -> Result<Program, SyntaxError> {
    let tokens = tokenize(src)?;
    Parser { tokens, i: 0, depth: 0 }.program()
}

/// Like [`parse`], for input that may not be UTF-8.
pub fn parse_bytes(src: &[u8]) -> Result<Program, SyntaxError> {
    match std::str::from_utf8(src) {
        Ok(s) => parse(s),
        Err(e) => {
            let valid = std::str::from_utf8(&src[..e.valid_up_to()]).expect("prefix is valid");
            let line = valid.matches('\n').count() + 1;
            let column = valid.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
            Err(SyntaxError::new(Pos { line, column }, "invalid UTF-8".into(), Vec::new()))
        }
    }
}

struct Parser {
    tokens: Vec<Token>,
    i: usize,
    depth: usize,
}

fn starts_atom(t: &Tok) -> bool {
    matches!(
        t,
        Tok::Ident(_) | Tok::Str(_) | Tok::Num(_) | Tok::LParen | Tok::Fetch | Tok::Lambda
    )
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.i].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let j = (self.i + k).min(self.tokens.len() - 1);
        &self.tokens[j].tok
    }

    fn pos(&self) -> Pos {
        self.tokens[self.i].pos
    }

    fn advance(&mut self) -> Tok {
        let t = self.tokens[self.i].tok.clone();
        if self.i + 1 < self.tokens.len() {
            self.i += 1;
        }
        t
    }

    fn fail<T>(&self, expected: &[&str]) -> Result<T, SyntaxError> {
        let found = self.peek().describe();
        Err(SyntaxError::new(
            self.pos(),
            format!("unexpected {found}"),
            expected.iter().map(|s| s.to_string()).collect(),
        ))
    }

    fn expect(&mut self, tok: Tok) -> Result<(), SyntaxError> {
        if *self.peek() == tok {
            self.advance();
            Ok(())
        } else {
            self.fail(&[&format!("'{}'", tok.symbol())])
        }
    }

    fn ident(&mut self) -> Result<String, SyntaxError> {
        match self.peek() {
            Tok::Ident(s) => {
                let s = s.clone();
                self.advance();
                Ok(s)
            }
            _ => self.fail(&["identifier"]),
        }
    }

    /// A name that may be bound by the user (not a builtin).
    fn binder(&mut self) -> Result<String, SyntaxError> {
        let pos = self.pos();
        let name = self.ident()?;
        if BuiltinFn::from_name(&name).is_some() {
            return Err(SyntaxError::new(
                pos,
                format!("'{name}' is a builtin and cannot be rebound"),
                vec!["identifier".into()],
            ));
        }
        Ok(name)
    }

    fn enter(&mut self) -> Result<(), SyntaxError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(SyntaxError::new(self.pos(), "expression nested too deeply".into(), Vec::new()));
        }
        Ok(())
    }

    fn program(&mut self) -> Result<Program, SyntaxError> {
        let mut stmts = Vec::new();
        let mut names = BTreeSet::new();
        loop {
            while *self.peek() == Tok::Sep {
                self.advance();
            }
            if *self.peek() == Tok::Eof {
                break;
            }
            let pos = self.pos();
            let stmt = self.stmt()?;
            if let Stmt::FunDef { name, .. } = &stmt {
                if !names.insert(name.clone()) {
                    return Err(SyntaxError::new(pos, format!("'{name}' is defined twice"), Vec::new()));
                }
            }
            stmts.push(stmt);
            match self.peek() {
                Tok::Sep | Tok::Eof => {}
                _ => return self.fail(&["end of statement", "operator", "argument"]),
            }
        }
        if stmts.is_empty() {
            return self.fail(&["statement"]);
        }
        Ok(Program { stmts })
    }

    /// `name p1, p2 p3 :=` ahead?
    fn is_fundef(&self) -> bool {
        if !matches!(self.peek_at(0), Tok::Ident(_)) {
            return false;
        }
        let mut k = 1;
        loop {
            match self.peek_at(k) {
                Tok::Ident(_) => k += 1,
                Tok::Comma if matches!(self.peek_at(k + 1), Tok::Ident(_)) => k += 2,
                Tok::Assign => return true,
                _ => return false,
            }
        }
    }

    fn stmt(&mut self) -> Result<Stmt, SyntaxError> {
        if !self.is_fundef() {
            return Ok(Stmt::Expr(self.expr()?));
        }
        let name = self.binder()?;
        let mut params = Vec::new();
        while *self.peek() != Tok::Assign {
            if *self.peek() == Tok::Comma {
                self.advance();
            }
            let pos = self.pos();
            let p = self.binder()?;
            if params.contains(&p) {
                return Err(SyntaxError::new(pos, format!("duplicate parameter '{p}'"), Vec::new()));
            }
            params.push(p);
        }
        self.expect(Tok::Assign)?;
        let body = self.expr()?;
        Ok(Stmt::FunDef { name, params, body })
    }

    pub fn expr(&mut self) -> Result<Expr, SyntaxError> {
        self.enter()?;
        let e = self.binary(1);
        self.depth -= 1;
        e
    }

    fn binop(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::And => BinOp::And,
            Tok::Eq => BinOp::Eq,
            Tok::Gt => BinOp::Gt,
            Tok::Lt => BinOp::Lt,
            Tok::In => BinOp::In,
            Tok::Star => BinOp::Mul,
            _ => return None,
        })
    }

    fn binary(&mut self, level: u8) -> Result<Expr, SyntaxError> {
        if level > 3 {
            return self.app();
        }
        let mut lhs = self.binary(level + 1)?;
        while let Some(op) = self.binop().filter(|op| op.precedence() == level) {
            self.advance();
            let rhs = self.binary(level + 1)?;
            lhs = Expr::BinOp {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn app(&mut self) -> Result<Expr, SyntaxError> {
        let head_pos = self.pos();
        let mut head = self.group_or_atom()?;
        if head.len() != 1 {
            return Err(SyntaxError::new(
                head_pos,
                "a parenthesized list must follow a function".into(),
                Vec::new(),
            ));
        }
        let head = head.pop().expect("one element");
        let mut args = Vec::new();
        while starts_atom(self.peek()) {
            args.extend(self.group_or_atom()?);
        }
        Ok(match head {
            _ if args.is_empty() => head,
            Expr::Builtin { name, args: none } if none.is_empty() => Expr::Builtin { name, args },
            func => Expr::Apply {
                func: Box::new(func),
                args,
            },
        })
    }

    /// An atom, or a parenthesized comma list (spliced into an argument list).
    fn group_or_atom(&mut self) -> Result<Vec<Expr>, SyntaxError> {
        if *self.peek() != Tok::LParen {
            return Ok(vec![self.atom()?]);
        }
        self.advance();
        let mut items = vec![self.expr()?];
        while *self.peek() == Tok::Comma {
            self.advance();
            items.push(self.expr()?);
        }
        if *self.peek() != Tok::RParen {
            return self.fail(&["')'", "','", "operator", "argument"]);
        }
        self.advance();
        Ok(items)
    }

    fn atom(&mut self) -> Result<Expr, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.advance();
                Ok(match BuiltinFn::from_name(&name) {
                    Some(b) => Expr::Builtin { name: b, args: Vec::new() },
                    None => Expr::Var(name),
                })
            }
            Tok::Str(s) => {
                self.advance();
                Ok(Expr::Str(s))
            }
            Tok::Num(n) => {
                self.advance();
                Ok(Expr::Num(n))
            }
            Tok::Fetch => {
                self.advance();
                Ok(Expr::Fetch(self.pattern()?))
            }
            Tok::Lambda => {
                self.advance();
                self.enter()?;
                let params = self.lambda_params()?;
                self.expect(Tok::Arrow)?;
                let body = self.expr()?;
                self.depth -= 1;
                Ok(Expr::Lambda {
                    params,
                    body: Box::new(body),
                })
            }
            _ => self.fail(&["expression"]),
        }
    }

    fn lambda_params(&mut self) -> Result<Params, SyntaxError> {
        if *self.peek() == Tok::LParen {
            self.advance();
            let mut names = vec![self.binder()?];
            while *self.peek() == Tok::Comma {
                self.advance();
                names.push(self.binder()?);
            }
            self.expect(Tok::RParen)?;
            return Ok(if names.len() == 1 {
                Params::Names(names)
            } else {
                Params::Tuple(names)
            });
        }
        let mut names = vec![self.binder()?];
        while matches!(self.peek(), Tok::Ident(_)) {
            names.push(self.binder()?);
        }
        Ok(Params::Names(names))
    }

    fn pattern(&mut self) -> Result<Pattern, SyntaxError> {
        let mut p = Pattern {
            nodes: vec![self.node_pat()?],
            edges: Vec::new(),
        };
        while *self.peek() == Tok::Arrow {
            self.advance();
            p.edges.push(self.edge_pat()?);
            self.expect(Tok::Arrow)?;
            p.nodes.push(self.node_pat()?);
        }
        Ok(p)
    }

    fn node_pat(&mut self) -> Result<NodePat, SyntaxError> {
        self.expect(Tok::LParen)?;
        let mut n = NodePat::default();
        if let Tok::Ident(_) = self.peek() {
            n.var = Some(self.ident()?);
        }
        if *self.peek() == Tok::LBrace {
            self.advance();
            loop {
                let key = self.ident()?;
                self.expect(Tok::Colon)?;
                let value = match self.peek().clone() {
                    Tok::Str(s) => PropValue::Str(s),
                    Tok::Ident(s) => PropValue::Param(s),
                    _ => return self.fail(&["string", "identifier"]),
                };
                self.advance();
                n.props.push((key, value));
                match self.peek() {
                    Tok::Comma => {
                        self.advance();
                    }
                    Tok::RBrace => {
                        self.advance();
                        break;
                    }
                    _ => return self.fail(&["','", "'}'"]),
                }
            }
        }
        if *self.peek() != Tok::RParen {
            let mut expected = vec!["')'"];
            if n.props.is_empty() {
                expected.push("'{'");
                if n.var.is_none() {
                    expected.push("identifier");
                }
            }
            return self.fail(&expected);
        }
        self.advance();
        Ok(n)
    }

    fn edge_pat(&mut self) -> Result<EdgePat, SyntaxError> {
        self.expect(Tok::LBracket)?;
        let e = match self.peek().clone() {
            Tok::Str(label) => {
                self.advance();
                // typeset labels sometimes carry spaces ("Has Affordance")
                EdgePat::Labeled(label.chars().filter(|c| !c.is_whitespace()).collect())
            }
            Tok::Ident(var) => {
                self.advance();
                if *self.peek() == Tok::Star {
                    self.advance();
                    EdgePat::Star(var)
                } else {
                    EdgePat::Edge(var)
                }
            }
            _ => return self.fail(&["string", "identifier"]),
        };
        if *self.peek() != Tok::RBracket {
            return self.fail(if matches!(e, EdgePat::Edge(_)) {
                &["']'", "'*'"]
            } else {
                &["']'"]
            });
        }
        self.advance();
        Ok(e)
    }
}
