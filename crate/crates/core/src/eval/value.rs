use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value as Json};

use crate::graph::{EdgeId, Graph, NodeHandle, PathRef};
use crate::rql::{print_expr, BuiltinFn, Expr, Params};

#[derive(Clone, Default)]
pub struct Env(Option<Arc<Frame>>);

struct Frame {
    name: String,
    value: Value,
    parent: Env,
}

impl Env {
    pub fn bind(&self, name: &str, value: Value) -> Env {
        Env(Some(Arc::new(Frame {
            name: name.to_owned(),
            value,
            parent: self.clone(),
        })))
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        let mut cur = self.0.as_deref();
        while let Some(f) = cur {
            if f.name == name {
                return Some(&f.value);
            }
            cur = f.parent.0.as_deref();
        }
        None
    }
}

pub enum FuncKind {
    Builtin(BuiltinFn),
    Closure { params: Params, body: Arc<Expr>, env: Env },
    Def { name: String, params: Vec<String>, body: Arc<Expr> },
}

/// A function value with any arguments already supplied.
pub struct Func {
    pub kind: FuncKind,
    pub bound: Vec<Value>,
}

impl Func {
    pub fn arity(&self) -> usize {
        match &self.kind {
            FuncKind::Builtin(b) => b.arity(),
            FuncKind::Closure { params, .. } => params.arity(),
            FuncKind::Def { params, .. } => params.len(),
        }
    }

    pub fn describe(&self) -> String {
        let base = match &self.kind {
            FuncKind::Builtin(b) => b.name().to_owned(),
            FuncKind::Def { name, .. } => name.clone(),
            FuncKind::Closure { params, body, .. } => print_expr(&Expr::Lambda {
                params: params.clone(),
                body: Box::new((**body).clone()),
            }),
        };
        if self.bound.is_empty() {
            base
        } else {
            format!("{base} applied to {} of {} arguments", self.bound.len(), self.arity())
        }
    }
}

impl fmt::Debug for Func {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.describe())
    }
}

#[derive(Debug, Clone)]
pub enum Value {
    Node(NodeHandle),
    Edge(EdgeId),
    Path(PathRef),
    List(Vec<Value>),
    Tuple(Vec<Value>),
    Num(f64),
    Bool(bool),
    Str(String),
    Func(Arc<Func>),
    /// Scorer plugin reference.
    Callable(String),
}

impl Value {
    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Node(_) => "node",
            Value::Edge(_) => "edge",
            Value::Path(_) => "path",
            Value::List(_) => "list",
            Value::Tuple(_) => "tuple",
            Value::Num(_) => "number",
            Value::Bool(_) => "boolean",
            Value::Str(_) => "string",
            Value::Func(_) => "function",
            Value::Callable(_) => "callable",
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Node(_) => 0,
            Value::Edge(_) => 1,
            Value::Path(_) => 2,
            Value::Tuple(_) => 3,
            Value::List(_) => 4,
            Value::Num(_) => 5,
            Value::Bool(_) => 6,
            Value::Str(_) => 7,
            Value::Callable(_) => 8,
            Value::Func(_) => 9,
        }
    }

    /// Total order used for tie-breaking: graph references by handle/id,
    /// sequences lexicographically, numbers by value.
    pub fn canonical_cmp(&self, other: &Value) -> Ordering {
        use Value::*;
        match (self, other) {
            (Node(a), Node(b)) => a.cmp(b),
            (Edge(a), Edge(b)) => a.cmp(b),
            (Path(a), Path(b)) => a.cmp(b),
            (List(a), List(b)) | (Tuple(a), Tuple(b)) => {
                for (x, y) in a.iter().zip(b) {
                    match x.canonical_cmp(y) {
                        Ordering::Equal => {}
                        o => return o,
                    }
                }
                a.len().cmp(&b.len())
            }
            (Num(a), Num(b)) => a.total_cmp(b),
            (Bool(a), Bool(b)) => a.cmp(b),
            (Str(a), Str(b)) | (Callable(a), Callable(b)) => a.cmp(b),
            (Func(a), Func(b)) => (Arc::as_ptr(a) as usize).cmp(&(Arc::as_ptr(b) as usize)),
            _ => self.rank().cmp(&other.rank()),
        }
    }

    pub fn node(&self) -> Option<&NodeHandle> {
        match self {
            Value::Node(h) => Some(h),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[Value]> {
        match self {
            Value::List(v) => Some(v),
            _ => None,
        }
    }

    /// JSON form: nodes and edges carry their current name and belief.
    pub fn to_json(&self, graph: &Graph) -> Json {
        match self {
            Value::Node(h) => node_json(graph, h),
            Value::Edge(id) => edge_json(graph, id),
            Value::Path(p) => json!({
                "nodes": p.nodes.iter().map(|h| node_json(graph, h)).collect::<Vec<_>>(),
                "edges": p.edges.iter().map(|e| edge_json(graph, e)).collect::<Vec<_>>(),
            }),
            Value::List(xs) => Json::Array(xs.iter().map(|x| x.to_json(graph)).collect()),
            Value::Tuple(xs) => json!({ "tuple": xs.iter().map(|x| x.to_json(graph)).collect::<Vec<_>>() }),
            Value::Num(n) => serde_json::Number::from_f64(*n).map_or(Json::Null, Json::Number),
            Value::Bool(b) => Json::Bool(*b),
            Value::Str(s) => Json::String(s.clone()),
            Value::Func(f) => json!({ "function": f.describe() }),
            Value::Callable(id) => json!({ "callable": id }),
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        self.canonical_cmp(other) == Ordering::Equal
    }
}

fn node_json(graph: &Graph, h: &NodeHandle) -> Json {
    match graph.node(h) {
        Some(n) => json!({
            "handle": h,
            "name": n.name,
            "type": n.node_type,
            "belief": n.belief.value(),
        }),
        None => json!({ "handle": h }),
    }
}

fn edge_json(graph: &Graph, id: &EdgeId) -> Json {
    match graph.edge(id) {
        Some(e) => json!({
            "id": id,
            "src": e.src,
            "dst": e.dst,
            "edge_type": e.edge_type,
            "belief": e.belief.value(),
        }),
        None => json!({ "id": id }),
    }
}
