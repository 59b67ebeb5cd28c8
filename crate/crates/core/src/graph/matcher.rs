//! Template matching: `(u)->[e]->(v)` chains with labeled, variable and
//! bounded variable-length (`[r *]`) steps.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::{fold_name, ConceptNode, EdgeId, Graph, NodeHandle, TypedEdge};
use crate::exec::Execution;

/// Upper bound on the length of a `[r *]` path.
pub const DEFAULT_MAX_PATH_LEN: usize = 6;

/// Literal constraints on one node position. `name` matches case-insensitively,
/// the other keys exactly.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeConstraint {
    pub var: Option<String>,
    pub name: Option<String>,
    pub handle: Option<String>,
    pub node_type: Option<String>,
    pub src: Option<String>,
}

impl NodeConstraint {
    pub fn var(name: &str) -> Self {
        Self {
            var: Some(name.to_owned()),
            ..Default::default()
        }
    }

    pub fn named(name: &str) -> Self {
        Self {
            name: Some(name.to_owned()),
            ..Default::default()
        }
    }

    pub fn accepts(&self, n: &ConceptNode) -> bool {
        self.name.as_ref().is_none_or(|x| fold_name(x) == fold_name(&n.name))
            && self.handle.as_ref().is_none_or(|x| x == n.handle.as_str())
            && self.node_type.as_ref().is_none_or(|x| *x == n.node_type)
            && self.src.as_ref().is_none_or(|x| *x == n.src)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TemplateStep {
    /// One edge with this exact label.
    Labeled(String),
    /// One edge of any label, bound to the variable.
    Edge(String),
    /// A simple directed path of 1..=max edges, bound to the variable.
    Star(String),
}

/// A compiled fetch template: `nodes[0] steps[0] nodes[1] ...`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Template {
    pub nodes: Vec<NodeConstraint>,
    pub steps: Vec<TemplateStep>,
}

impl Template {
    pub fn single(node: NodeConstraint) -> Self {
        Self {
            nodes: vec![node],
            steps: Vec::new(),
        }
    }

    pub fn then(mut self, step: TemplateStep, node: NodeConstraint) -> Self {
        self.steps.push(step);
        self.nodes.push(node);
        self
    }

    /// Free variables, left to right, without repeats.
    pub fn variables(&self) -> Vec<String> {
        let mut seen = Vec::new();
        let mut push = |v: &String| {
            if !seen.contains(v) {
                seen.push(v.clone());
            }
        };
        for (i, n) in self.nodes.iter().enumerate() {
            if let Some(v) = &n.var {
                push(v);
            }
            if let Some(TemplateStep::Edge(v) | TemplateStep::Star(v)) = self.steps.get(i) {
                push(v);
            }
        }
        seen
    }
}

/// A path as alternating nodes and edges: `nodes.len() == edges.len() + 1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PathRef {
    pub nodes: Vec<NodeHandle>,
    pub edges: Vec<EdgeId>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Bound {
    Node(NodeHandle),
    Edge(EdgeId),
    Path(PathRef),
}

/// One instantiation of a template: values in [`Template::variables`] order
/// plus the full matched chain.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Match {
    pub values: Vec<Bound>,
    pub trace: PathRef,
}

struct Search<'a> {
    graph: &'a Graph,
    template: &'a Template,
    vars: Vec<String>,
    max_len: usize,
}

struct State {
    slots: Vec<Option<Bound>>,
    trace: PathRef,
}

impl Search<'_> {
    fn slot(&self, var: &str) -> usize {
        self.vars.iter().position(|v| v == var).expect("variable enumerated")
    }

    /// Binds `var` to `value` unless it already holds something else.
    /// Returns the previous slot content for undo, or `Err` on conflict.
    fn bind(&self, st: &mut State, var: &Option<String>, value: Bound) -> Result<Option<(usize, bool)>, ()> {
        let Some(var) = var else { return Ok(None) };
        let i = self.slot(var);
        match &st.slots[i] {
            Some(existing) if *existing == value => Ok(Some((i, false))),
            Some(_) => Err(()),
            None => {
                st.slots[i] = Some(value);
                Ok(Some((i, true)))
            }
        }
    }

    fn unbind(st: &mut State, undo: Option<(usize, bool)>) {
        if let Some((i, true)) = undo {
            st.slots[i] = None;
        }
    }

    fn start(&self, h: &NodeHandle, out: &mut Vec<Match>) {
        let mut st = State {
            slots: vec![None; self.vars.len()],
            trace: PathRef {
                nodes: vec![h.clone()],
                edges: Vec::new(),
            },
        };
        let Ok(undo) = self.bind(&mut st, &self.template.nodes[0].var, Bound::Node(h.clone())) else {
            return;
        };
        self.extend(0, h, &mut st, out);
        Self::unbind(&mut st, undo);
    }

    fn emit(&self, st: &State, out: &mut Vec<Match>) {
        out.push(Match {
            values: st.slots.iter().map(|s| s.clone().expect("all slots bound")).collect(),
            trace: st.trace.clone(),
        });
    }

    /// Node `i` of the template is bound to `cur`; match the remaining steps.
    fn extend(&self, i: usize, cur: &NodeHandle, st: &mut State, out: &mut Vec<Match>) {
        let Some(step) = self.template.steps.get(i) else {
            self.emit(st, out);
            return;
        };
        match step {
            TemplateStep::Labeled(label) => {
                for e in self.graph.out_edges(cur).filter(|e| &e.edge_type == label) {
                    self.step_to(i, e, None, st, out);
                }
            }
            TemplateStep::Edge(var) => {
                for e in self.graph.out_edges(cur) {
                    self.step_to(i, e, Some(var), st, out);
                }
            }
            TemplateStep::Star(var) => {
                let mut visited = HashSet::from([cur.clone()]);
                let mut path = PathRef {
                    nodes: vec![cur.clone()],
                    edges: Vec::new(),
                };
                self.walk(i, var, &mut visited, &mut path, st, out);
            }
        }
    }

    fn step_to(&self, i: usize, e: &TypedEdge, edge_var: Option<&String>, st: &mut State, out: &mut Vec<Match>) {
        let next = &e.dst;
        let constraint = &self.template.nodes[i + 1];
        if !constraint.accepts(&self.graph.nodes[next]) {
            return;
        }
        let Ok(undo_edge) = self.bind(st, &edge_var.cloned(), Bound::Edge(e.id.clone())) else {
            return;
        };
        if let Ok(undo_node) = self.bind(st, &constraint.var, Bound::Node(next.clone())) {
            st.trace.edges.push(e.id.clone());
            st.trace.nodes.push(next.clone());
            self.extend(i + 1, next, st, out);
            st.trace.edges.pop();
            st.trace.nodes.pop();
            Self::unbind(st, undo_node);
        }
        Self::unbind(st, undo_edge);
    }

    fn walk(
        &self,
        i: usize,
        var: &str,
        visited: &mut HashSet<NodeHandle>,
        path: &mut PathRef,
        st: &mut State,
        out: &mut Vec<Match>,
    ) {
        if path.edges.len() == self.max_len {
            return;
        }
        let tail = path.nodes.last().expect("path starts at a node").clone();
        let constraint = &self.template.nodes[i + 1];
        for e in self.graph.out_edges(&tail) {
            if visited.contains(&e.dst) {
                continue;
            }
            path.edges.push(e.id.clone());
            path.nodes.push(e.dst.clone());
            visited.insert(e.dst.clone());

            if constraint.accepts(&self.graph.nodes[&e.dst]) {
                if let Ok(undo_path) = self.bind(st, &Some(var.to_owned()), Bound::Path(path.clone())) {
                    if let Ok(undo_node) = self.bind(st, &constraint.var, Bound::Node(e.dst.clone())) {
                        let trace_len = (st.trace.nodes.len(), st.trace.edges.len());
                        st.trace.edges.extend(path.edges.iter().cloned());
                        st.trace.nodes.extend(path.nodes[1..].iter().cloned());
                        self.extend(i + 1, &e.dst, st, out);
                        st.trace.nodes.truncate(trace_len.0);
                        st.trace.edges.truncate(trace_len.1);
                        Self::unbind(st, undo_node);
                    }
                    Self::unbind(st, undo_path);
                }
            }
            self.walk(i, var, visited, path, st, out);

            visited.remove(&e.dst);
            path.edges.pop();
            path.nodes.pop();
        }
    }
}

impl Graph {
    /// Finds every instantiation of `template`, sorted by bound values.
    /// Duplicate instantiations (same values via different chains) collapse
    /// to the first chain, except for variable-free templates, which return
    /// one match per distinct chain.
    pub fn match_template(&self, template: &Template, max_path_len: usize, exec: Execution) -> Vec<Match> {
        if template.nodes.is_empty() || template.steps.len() + 1 != template.nodes.len() {
            return Vec::new();
        }
        let search = Search {
            graph: self,
            template,
            vars: template.variables(),
            max_len: max_path_len,
        };
        let first = &template.nodes[0];
        let candidates: Vec<NodeHandle> = if let Some(h) = &first.handle {
            let h = NodeHandle::from(h.as_str());
            self.nodes.contains_key(&h).then_some(h).into_iter().collect()
        } else if let Some(name) = &first.name {
            self.nodes_named(name)
        } else {
            self.nodes.keys().cloned().collect()
        };
        let candidates: Vec<NodeHandle> = candidates
            .into_iter()
            .filter(|h| first.accepts(&self.nodes[h]))
            .collect();

        let mut all = exec.flat_map(&candidates, |h| {
            let mut out = Vec::new();
            search.start(h, &mut out);
            out
        });
        all.sort();
        let keep_chains = search.vars.is_empty();
        let mut seen = BTreeSet::new();
        all.retain(|m| {
            if keep_chains {
                true
            } else {
                seen.insert(m.values.clone())
            }
        });
        all
    }
}
