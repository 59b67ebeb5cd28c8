use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BuiltinFn {
    Map,
    Filter,
    Find,
    SortBy,
    Len,
    Belief,
    ArgMax,
    ArgMaxBy,
}

impl BuiltinFn {
    pub const ALL: [BuiltinFn; 8] = [
        BuiltinFn::Map,
        BuiltinFn::Filter,
        BuiltinFn::Find,
        BuiltinFn::SortBy,
        BuiltinFn::Len,
        BuiltinFn::Belief,
        BuiltinFn::ArgMax,
        BuiltinFn::ArgMaxBy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinFn::Map => "map",
            BuiltinFn::Filter => "filter",
            BuiltinFn::Find => "find",
            BuiltinFn::SortBy => "SortBy",
            BuiltinFn::Len => "Len",
            BuiltinFn::Belief => "Belief",
            BuiltinFn::ArgMax => "ArgMax",
            BuiltinFn::ArgMaxBy => "argMaxBy",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|b| b.name() == s)
    }

    pub fn arity(self) -> usize {
        match self {
            BuiltinFn::Len | BuiltinFn::Belief => 1,
            _ => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinOp {
    Eq,
    Gt,
    Lt,
    Mul,
    And,
    In,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Eq => "=",
            BinOp::Gt => ">",
            BinOp::Lt => "<",
            BinOp::Mul => "*",
            BinOp::And => "and",
            BinOp::In => "in",
        }
    }

    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinOp::And => 1,
            BinOp::Eq | BinOp::Gt | BinOp::Lt | BinOp::In => 2,
            BinOp::Mul => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Params {
    /// `\a b -> ..`
    Names(Vec<String>),
    /// `\(u, v) -> ..`: one argument, destructured.
    Tuple(Vec<String>),
}

impl Params {
    pub fn arity(&self) -> usize {
        match self {
            Params::Names(n) => n.len(),
            Params::Tuple(_) => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PropValue {
    Str(String),
    /// Resolved against the environment when the fetch runs.
    Param(String),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodePat {
    pub var: Option<String>,
    pub props: Vec<(String, PropValue)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgePat {
    Labeled(String),
    Edge(String),
    Star(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pattern {
    pub nodes: Vec<NodePat>,
    pub edges: Vec<EdgePat>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Fetch(Pattern),
    Lambda { params: Params, body: Box<Expr> },
    Apply { func: Box<Expr>, args: Vec<Expr> },
    Builtin { name: BuiltinFn, args: Vec<Expr> },
    BinOp { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Var(String),
    Str(String),
    Num(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Stmt {
    FunDef { name: String, params: Vec<String>, body: Expr },
    Expr(Expr),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Program {
    pub stmts: Vec<Stmt>,
}

impl Program {
    pub fn fundef(&self, name: &str) -> Option<(&[String], &Expr)> {
        self.stmts.iter().find_map(|s| match s {
            Stmt::FunDef { name: n, params, body } if n == name => Some((params.as_slice(), body)),
            _ => None,
        })
    }
}
