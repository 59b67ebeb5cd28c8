//! Query evaluation over an immutable graph.
//!
//! Application is arity-directed: when a function of arity `k` receives more
//! than `k` arguments, the surplus is applied to argument `k`, so
//! `Len parents u` is `Len (parents u)` and `filter p parameters a` is
//! `filter p (parameters a)`. With fewer than `k` arguments the result is a
//! partial application.

mod plugins;
mod value;

use std::cell::{Cell, RefCell};
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

pub use plugins::{FixedScore, PluginRegistry, ScorerPlugin};
pub use value::{Env, Func, FuncKind, Value};

use crate::exec::Execution;
use crate::graph::{Bound, Graph, NodeHandle, DEFAULT_MAX_PATH_LEN};
use crate::rql::{compile_pattern, parse, BinOp, BuiltinFn, Expr, Params, Pattern, PatternError, Program, Stmt};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable '{0}'")]
    Unbound(String),
    #[error("{op}: expected {expected}, found {found}")]
    Type {
        op: String,
        expected: &'static str,
        found: &'static str,
    },
    #[error("{name} takes {expected} argument(s), got {found}")]
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
    #[error("a {0} cannot be applied to arguments")]
    NotCallable(&'static str),
    #[error("no scorer plugin registered for '{0}'")]
    NoPlugin(String),
    #[error("{0} of an empty list")]
    EmptyResult(String),
    #[error(transparent)]
    Pattern(#[from] PatternError),
    #[error("call depth limit of {0} exceeded")]
    DepthLimit(usize),
    #[error("the program defines no value to return")]
    NoResult,
}

pub type Result<T> = std::result::Result<T, EvalError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalOptions {
    pub max_path_len: usize,
    pub exec: Execution,
    pub max_call_depth: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            max_path_len: DEFAULT_MAX_PATH_LEN,
            exec: Execution::default(),
            max_call_depth: 96,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub value: Value,
    pub warnings: Vec<String>,
}

struct Def {
    params: Vec<String>,
    body: Arc<Expr>,
}

struct Ctx<'a> {
    graph: &'a Graph,
    plugins: &'a PluginRegistry,
    opts: EvalOptions,
    globals: &'a BTreeMap<String, Value>,
    defs: BTreeMap<&'a str, Def>,
    memo: RefCell<BTreeMap<String, Value>>,
    warnings: RefCell<Vec<String>>,
    depth: Cell<usize>,
}

/// Evaluates `program` and returns the value of its last statement. A
/// trailing parameterless definition is evaluated; one with parameters
/// yields a function value.
pub fn evaluate(
    program: &Program,
    graph: &Graph,
    env: &BTreeMap<String, Value>,
    plugins: &PluginRegistry,
    opts: EvalOptions,
) -> Result<Evaluation> {
    let mut defs = BTreeMap::new();
    for s in &program.stmts {
        if let Stmt::FunDef { name, params, body } = s {
            defs.insert(
                name.as_str(),
                Def {
                    params: params.clone(),
                    body: Arc::new(body.clone()),
                },
            );
        }
    }
    let ctx = Ctx {
        graph,
        plugins,
        opts,
        globals: env,
        defs,
        memo: RefCell::default(),
        warnings: RefCell::default(),
        depth: Cell::new(0),
    };
    let value = match program.stmts.last().ok_or(EvalError::NoResult)? {
        Stmt::Expr(e) => ctx.eval(e, &Env::default())?,
        Stmt::FunDef { name, .. } => ctx.lookup(name, &Env::default())?,
    };
    Ok(Evaluation {
        value,
        warnings: ctx.warnings.into_inner(),
    })
}

fn type_err<T>(op: &str, expected: &'static str, found: &Value) -> Result<T> {
    Err(EvalError::Type {
        op: op.to_owned(),
        expected,
        found: found.type_name(),
    })
}

impl Ctx<'_> {
    fn warn(&self, msg: String) {
        tracing::warn!("{msg}");
        self.warnings.borrow_mut().push(msg);
    }

    fn lookup(&self, name: &str, env: &Env) -> Result<Value> {
        if let Some(v) = env.get(name) {
            return Ok(v.clone());
        }
        if let Some(def) = self.defs.get(name) {
            if !def.params.is_empty() {
                return Ok(Value::Func(Arc::new(Func {
                    kind: FuncKind::Def {
                        name: name.to_owned(),
                        params: def.params.clone(),
                        body: def.body.clone(),
                    },
                    bound: Vec::new(),
                })));
            }
            if let Some(v) = self.memo.borrow().get(name) {
                return Ok(v.clone());
            }
            let v = self.nested(|| self.eval(&def.body, &Env::default()))?;
            self.memo.borrow_mut().insert(name.to_owned(), v.clone());
            return Ok(v);
        }
        self.globals
            .get(name)
            .cloned()
            .ok_or_else(|| EvalError::Unbound(name.to_owned()))
    }

    fn nested<T>(&self, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let d = self.depth.get() + 1;
        if d > self.opts.max_call_depth {
            return Err(EvalError::DepthLimit(self.opts.max_call_depth));
        }
        self.depth.set(d);
        let r = f();
        self.depth.set(d - 1);
        r
    }

    fn eval(&self, e: &Expr, env: &Env) -> Result<Value> {
        match e {
            Expr::Var(name) => self.lookup(name, env),
            Expr::Str(s) => Ok(Value::Str(s.clone())),
            Expr::Num(n) => Ok(Value::Num(*n)),
            Expr::Fetch(p) => self.fetch(p, env),
            Expr::Lambda { params, body } => Ok(Value::Func(Arc::new(Func {
                kind: FuncKind::Closure {
                    params: params.clone(),
                    body: Arc::new((**body).clone()),
                    env: env.clone(),
                },
                bound: Vec::new(),
            }))),
            Expr::Apply { func, args } => {
                let f = self.eval(func, env)?;
                let args = args.iter().map(|a| self.eval(a, env)).collect::<Result<Vec<_>>>()?;
                self.apply(f, args)
            }
            Expr::Builtin { name, args } => {
                let f = Value::Func(Arc::new(Func {
                    kind: FuncKind::Builtin(*name),
                    bound: Vec::new(),
                }));
                if args.is_empty() {
                    return Ok(f);
                }
                let args = args.iter().map(|a| self.eval(a, env)).collect::<Result<Vec<_>>>()?;
                self.apply(f, args)
            }
            Expr::BinOp { op, lhs, rhs } => self.binop(*op, lhs, rhs, env),
        }
    }

    fn binop(&self, op: BinOp, lhs: &Expr, rhs: &Expr, env: &Env) -> Result<Value> {
        let l = self.eval(lhs, env)?;
        if op == BinOp::And {
            match l {
                Value::Bool(false) => return Ok(Value::Bool(false)),
                Value::Bool(true) => {}
                other => return type_err("and", "boolean", &other),
            }
            return match self.eval(rhs, env)? {
                Value::Bool(b) => Ok(Value::Bool(b)),
                other => type_err("and", "boolean", &other),
            };
        }
        let r = self.eval(rhs, env)?;
        Ok(match op {
            BinOp::Eq => {
                if let Some(f) = [&l, &r].into_iter().find(|v| matches!(v, Value::Func(_))) {
                    return type_err("=", "comparable value", f);
                }
                Value::Bool(l == r)
            }
            BinOp::Gt => Value::Bool(self.num("'>'", &l)? > self.num("'>'", &r)?),
            BinOp::Lt => Value::Bool(self.num("'<'", &l)? < self.num("'<'", &r)?),
            BinOp::Mul => Value::Num(self.num("'*'", &l)? * self.num("'*'", &r)?),
            BinOp::In => match &r {
                Value::List(xs) | Value::Tuple(xs) => Value::Bool(xs.contains(&l)),
                other => return type_err("in", "list", other),
            },
            BinOp::And => unreachable!("handled above"),
        })
    }

    /// Numeric view of a value. Nodes holding a number in their name (prior
    /// nodes) convert; a single-element list converts through its element; an
    /// empty list is a missing factor and counts as 1.
    fn num(&self, op: &str, v: &Value) -> Result<f64> {
        match v {
            Value::Num(n) => Ok(*n),
            Value::Node(h) => {
                let n = self.graph.node(h).expect("values only reference live nodes");
                n.name.trim().parse::<f64>().or_else(|_| type_err(op, "number", v))
            }
            Value::List(xs) if xs.len() == 1 => self.num(op, &xs[0]),
            Value::List(xs) if xs.is_empty() => {
                self.warn(format!("{op}: empty list used as a number, treating it as 1"));
                Ok(1.0)
            }
            other => type_err(op, "number", other),
        }
    }

    fn fetch(&self, p: &Pattern, env: &Env) -> Result<Value> {
        let compiled = compile_pattern(p)?;
        let template = compiled.instantiate(|key, param| -> Result<String> {
            let v = self.lookup(param, env)?;
            self.constraint_text(key, &v)
        })?;
        let nvars = template.variables().len();
        let matches = self.graph.match_template(&template, self.opts.max_path_len, self.opts.exec);
        let bound = |b: Bound| match b {
            Bound::Node(h) => Value::Node(h),
            Bound::Edge(e) => Value::Edge(e),
            Bound::Path(p) => Value::Path(p),
        };
        Ok(Value::List(
            matches
                .into_iter()
                .map(|m| match nvars {
                    0 => Value::Path(m.trace),
                    1 => bound(m.values.into_iter().next().expect("one variable")),
                    _ => Value::Tuple(m.values.into_iter().map(bound).collect()),
                })
                .collect(),
        ))
    }

    fn constraint_text(&self, key: &str, v: &Value) -> Result<String> {
        match v {
            Value::Str(s) => Ok(s.clone()),
            Value::Num(n) => Ok(n.to_string()),
            Value::Node(h) => {
                let n = self.graph.node(h).expect("values only reference live nodes");
                Ok(match key {
                    "name" => n.name.clone(),
                    "handle" => h.to_string(),
                    "type" => n.node_type.clone(),
                    _ => n.src.clone(),
                })
            }
            Value::List(xs) if xs.len() == 1 => self.constraint_text(key, &xs[0]),
            other => type_err(&format!("node property '{key}'"), "string or node", other),
        }
    }

    fn apply(&self, f: Value, args: Vec<Value>) -> Result<Value> {
        match f {
            Value::Func(func) => {
                let k = func.arity();
                let mut all = func.bound.clone();
                all.extend(args);
                match all.len().cmp(&k) {
                    Ordering::Less => Ok(Value::Func(Arc::new(Func {
                        kind: clone_kind(&func.kind),
                        bound: all,
                    }))),
                    Ordering::Equal => self.invoke(&func.kind, all),
                    Ordering::Greater => {
                        let mut rest = all.split_off(k - 1);
                        let head = rest.remove(0);
                        let last = self.apply(head, rest)?;
                        all.push(last);
                        self.invoke(&func.kind, all)
                    }
                }
            }
            Value::Node(h) => {
                let n = self.graph.node(&h).expect("values only reference live nodes");
                let plugin = self
                    .plugins
                    .get(h.as_str())
                    .or_else(|| self.plugins.get(&n.name))
                    .ok_or_else(|| EvalError::NoPlugin(n.name.clone()))?;
                self.score(plugin.as_ref(), &n.name, &args)
            }
            Value::Callable(id) => {
                let plugin = self.plugins.get(&id).ok_or_else(|| EvalError::NoPlugin(id.clone()))?;
                self.score(plugin.as_ref(), &id, &args)
            }
            other => Err(EvalError::NotCallable(other.type_name())),
        }
    }

    fn score(&self, plugin: &dyn ScorerPlugin, name: &str, args: &[Value]) -> Result<Value> {
        let [command, environment, params] = args else {
            return Err(EvalError::Arity {
                name: name.to_owned(),
                expected: 3,
                found: args.len(),
            });
        };
        Ok(Value::Num(plugin.score(command, environment, params)))
    }

    fn invoke(&self, kind: &FuncKind, args: Vec<Value>) -> Result<Value> {
        self.nested(|| match kind {
            FuncKind::Builtin(b) => self.builtin(*b, args),
            FuncKind::Def { params, body, .. } => {
                let mut env = Env::default();
                for (p, a) in params.iter().zip(args) {
                    env = env.bind(p, a);
                }
                self.eval(body, &env)
            }
            FuncKind::Closure { params, body, env } => {
                let env = bind_params(env, params, args)?;
                self.eval(body, &env)
            }
        })
    }

    fn call1(&self, f: &Value, x: Value) -> Result<Value> {
        self.apply(f.clone(), vec![x])
    }

    fn list(&self, op: BuiltinFn, v: Value) -> Result<Vec<Value>> {
        match v {
            Value::List(xs) => Ok(xs),
            other => type_err(op.name(), "list", &other),
        }
    }

    fn builtin(&self, b: BuiltinFn, mut args: Vec<Value>) -> Result<Value> {
        match b {
            BuiltinFn::Len => {
                let x = args.pop().expect("arity 1");
                match &x {
                    Value::List(xs) | Value::Tuple(xs) => Ok(Value::Num(xs.len() as f64)),
                    Value::Path(p) => Ok(Value::Num(p.edges.len() as f64)),
                    other => type_err("Len", "list", other),
                }
            }
            BuiltinFn::Belief => {
                let x = args.pop().expect("arity 1");
                self.belief(&x).map(Value::Num)
            }
            _ => {
                let xs = self.list(b, args.pop().expect("arity 2"))?;
                let f = args.pop().expect("arity 2");
                self.higher_order(b, f, xs)
            }
        }
    }

    fn belief(&self, x: &Value) -> Result<f64> {
        let g = self.graph;
        let node = |h| g.node(h).expect("values only reference live nodes").belief.value();
        let edge = |e| g.edge(e).expect("values only reference live edges").belief.value();
        match x {
            Value::Node(h) => Ok(node(h)),
            Value::Edge(e) => Ok(edge(e)),
            Value::Path(p) => {
                let interior = p.nodes.len().saturating_sub(1);
                let nodes: f64 = p.nodes.iter().take(interior).skip(1).map(node).product();
                Ok(nodes * p.edges.iter().map(edge).product::<f64>())
            }
            Value::List(xs) if xs.len() == 1 => self.belief(&xs[0]),
            other => type_err("Belief", "node, edge or path", other),
        }
    }

    fn higher_order(&self, b: BuiltinFn, f: Value, xs: Vec<Value>) -> Result<Value> {
        match b {
            BuiltinFn::Map => {
                let keyed = matches!(&f, Value::Func(func)
                    if matches!(func.kind, FuncKind::Closure { params: Params::Tuple(_), .. }));
                let mut out = Vec::with_capacity(xs.len());
                for x in xs {
                    // a destructuring lambda keeps the element's key alongside the result
                    let key = match (&x, keyed) {
                        (Value::Tuple(parts), true) => parts.first().cloned(),
                        _ => None,
                    };
                    let y = self.call1(&f, x)?;
                    out.push(match key {
                        Some(k) => Value::Tuple(vec![k, y]),
                        None => y,
                    });
                }
                Ok(Value::List(out))
            }
            BuiltinFn::Filter | BuiltinFn::Find => {
                let mut out = Vec::new();
                for x in xs {
                    match self.call1(&f, x.clone())? {
                        Value::Bool(true) => {
                            if b == BuiltinFn::Find {
                                return Ok(x);
                            }
                            out.push(x);
                        }
                        Value::Bool(false) => {}
                        other => return type_err(b.name(), "boolean predicate", &other),
                    }
                }
                Ok(Value::List(out))
            }
            BuiltinFn::SortBy => {
                let mut keyed = xs
                    .into_iter()
                    .map(|x| Ok((self.num("SortBy", &self.call1(&f, x.clone())?)?, x)))
                    .collect::<Result<Vec<_>>>()?;
                keyed.sort_by(|(ka, a), (kb, b)| kb.total_cmp(ka).then_with(|| a.canonical_cmp(b)));
                Ok(Value::List(keyed.into_iter().map(|(_, x)| x).collect()))
            }
            BuiltinFn::ArgMax | BuiltinFn::ArgMaxBy => {
                let mut best: Option<(f64, Value)> = None;
                for x in xs {
                    let k = self.num(b.name(), &self.call1(&f, x.clone())?)?;
                    let better = match &best {
                        None => true,
                        Some((bk, bx)) => k > *bk || (k == *bk && x.canonical_cmp(bx) == Ordering::Less),
                    };
                    if better {
                        best = Some((k, x));
                    }
                }
                best.map(|(_, x)| x).ok_or_else(|| EvalError::EmptyResult(b.name().to_owned()))
            }
            BuiltinFn::Len | BuiltinFn::Belief => unreachable!("unary builtins handled by caller"),
        }
    }
}

fn clone_kind(k: &FuncKind) -> FuncKind {
    match k {
        FuncKind::Builtin(b) => FuncKind::Builtin(*b),
        FuncKind::Closure { params, body, env } => FuncKind::Closure {
            params: params.clone(),
            body: body.clone(),
            env: env.clone(),
        },
        FuncKind::Def { name, params, body } => FuncKind::Def {
            name: name.clone(),
            params: params.clone(),
            body: body.clone(),
        },
    }
}

fn bind_params(env: &Env, params: &Params, args: Vec<Value>) -> Result<Env> {
    let mut env = env.clone();
    match params {
        Params::Names(names) => {
            for (p, a) in names.iter().zip(args) {
                env = env.bind(p, a);
            }
        }
        Params::Tuple(names) => {
            let arg = args.into_iter().next().expect("arity 1");
            let parts = match arg {
                Value::Tuple(parts) | Value::List(parts) if parts.len() == names.len() => parts,
                other => {
                    return Err(EvalError::Type {
                        op: "lambda".into(),
                        expected: "tuple matching the parameter list",
                        found: other.type_name(),
                    })
                }
            };
            for (p, a) in names.iter().zip(parts) {
                env = env.bind(p, a);
            }
        }
    }
    Ok(env)
}

/// Picks the grounding algorithm with the highest `score(L, E, params) * prior`.
pub const REPRESENTATION_QUERY: &str = "\
algParam := fetch (u{type:'GroundingAlgorithm'})->
    ['HasParameters'] -> (v)
prior n := fetch ({name:n})->['HasPriorProb']->(v)
groundings L,E := argMaxBy(\\(u,v) -> v)
    map(\\(u,v) -> u(L,E,v)*prior u) algParam
groundings L E";

/// Runs [`REPRESENTATION_QUERY`] and returns the winning algorithm with its score.
pub fn select_representation(
    command: Value,
    environment: Value,
    graph: &Graph,
    plugins: &PluginRegistry,
    opts: EvalOptions,
) -> Result<(NodeHandle, f64, Vec<String>)> {
    let program = parse(REPRESENTATION_QUERY).expect("built-in query parses");
    let env = BTreeMap::from([("L".to_owned(), command), ("E".to_owned(), environment)]);
    let out = evaluate(&program, graph, &env, plugins, opts)?;
    match out.value {
        Value::Tuple(parts) => match parts.as_slice() {
            [Value::Node(h), Value::Num(s)] => Ok((h.clone(), *s, out.warnings)),
            _ => type_err("select_representation", "(node, score)", &Value::Tuple(parts)),
        },
        other => type_err("select_representation", "(node, score)", &other),
    }
}
