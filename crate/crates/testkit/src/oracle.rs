//! Brute-force reference semantics.

use std::collections::{BTreeMap, BTreeSet};

use brain_core::graph::{
    Assertion, Bound, EndpointDescriptor, ConceptNode, EdgeId, Graph, Match, NodeConstraint, NodeHandle, PathRef, Template, TemplateStep,
    TypedEdge, Verdict,
};

pub fn fold(s: &str) -> String {
    s.trim().to_lowercase()
}

pub fn accepts(c: &NodeConstraint, n: &ConceptNode) -> bool {
    if let Some(x) = &c.name {
        if fold(x) != fold(&n.name) {
            return false;
        }
    }
    c.handle.as_deref().is_none_or(|x| x == n.handle.as_str())
        && c.node_type.as_deref().is_none_or(|x| x == n.node_type)
        && c.src.as_deref().is_none_or(|x| x == n.src)
}

fn template_vars(t: &Template) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut add = |v: &str| {
        if !out.iter().any(|x| x == v) {
            out.push(v.to_owned());
        }
    };
    for i in 0..t.nodes.len() {
        if let Some(v) = &t.nodes[i].var {
            add(v);
        }
        match t.steps.get(i) {
            Some(TemplateStep::Edge(v)) | Some(TemplateStep::Star(v)) => add(v),
            _ => {}
        }
    }
    out
}

/// Every directed walk of exactly `len` edges, as (nodes, edges).
fn walks(nodes: &[&ConceptNode], edges: &[&TypedEdge], len: usize) -> Vec<(Vec<NodeHandle>, Vec<usize>)> {
    let mut out = Vec::new();
    for n in nodes {
        let mut stack = vec![(vec![n.handle.clone()], Vec::<usize>::new())];
        while let Some((ns, es)) = stack.pop() {
            if es.len() == len {
                out.push((ns, es));
                continue;
            }
            let tail = ns.last().unwrap();
            for (i, e) in edges.iter().enumerate() {
                if &e.src == tail {
                    let mut ns2 = ns.clone();
                    ns2.push(e.dst.clone());
                    let mut es2 = es.clone();
                    es2.push(i);
                    stack.push((ns2, es2));
                }
            }
        }
    }
    out
}

/// All ways to give each step a length: 1 for single-edge steps, `1..=max`
/// for stars.
fn profiles(steps: &[TemplateStep], max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for s in steps {
        let range = match s {
            TemplateStep::Star(_) => 1..=max,
            _ => 1..=1,
        };
        out = out
            .into_iter()
            .flat_map(|p| {
                range.clone().map(move |k| {
                    let mut q = p.clone();
                    q.push(k);
                    q
                })
            })
            .collect();
    }
    out
}

/// Template matches by exhaustive walk enumeration: every walk whose length
/// fits some step-length profile is cut into segments and checked.
pub fn match_brute(g: &Graph, t: &Template, max_len: usize) -> Vec<Match> {
    if t.nodes.is_empty() || t.nodes.len() != t.steps.len() + 1 {
        return Vec::new();
    }
    let nodes: Vec<&ConceptNode> = g.nodes().collect();
    let by_handle: BTreeMap<&NodeHandle, &ConceptNode> = nodes.iter().map(|n| (&n.handle, *n)).collect();
    let edges: Vec<&TypedEdge> = g.edges().collect();
    let vars = template_vars(t);
    let mut found: Vec<Match> = Vec::new();
    let mut by_len: BTreeMap<usize, Vec<_>> = BTreeMap::new();
    for prof in profiles(&t.steps, max_len) {
        let total: usize = prof.iter().sum();
        let ws = by_len.entry(total).or_insert_with(|| walks(&nodes, &edges, total));
        'walk: for (wn, we) in ws.iter() {
            let mut bind: BTreeMap<String, Bound> = BTreeMap::new();
            let put = |k: &str, v: Bound, bind: &mut BTreeMap<String, Bound>| -> bool {
                match bind.get(k) {
                    Some(old) => *old == v,
                    None => {
                        bind.insert(k.to_owned(), v);
                        true
                    }
                }
            };
            let mut at = 0usize;
            for (i, c) in t.nodes.iter().enumerate() {
                let h = &wn[at];
                if !accepts(c, by_handle[h]) {
                    continue 'walk;
                }
                if let Some(v) = &c.var {
                    if !put(v, Bound::Node(h.clone()), &mut bind) {
                        continue 'walk;
                    }
                }
                let Some(step) = t.steps.get(i) else { break };
                let k = prof[i];
                let seg_nodes = &wn[at..=at + k];
                let seg_edges: Vec<EdgeId> = we[at..at + k].iter().map(|&j| edges[j].id.clone()).collect();
                match step {
                    TemplateStep::Labeled(l) => {
                        if &edges[we[at]].edge_type != l {
                            continue 'walk;
                        }
                    }
                    TemplateStep::Edge(v) => {
                        if !put(v, Bound::Edge(seg_edges[0].clone()), &mut bind) {
                            continue 'walk;
                        }
                    }
                    TemplateStep::Star(v) => {
                        let distinct: BTreeSet<&NodeHandle> = seg_nodes.iter().collect();
                        if distinct.len() != seg_nodes.len() {
                            continue 'walk;
                        }
                        let p = PathRef {
                            nodes: seg_nodes.to_vec(),
                            edges: seg_edges,
                        };
                        if !put(v, Bound::Path(p), &mut bind) {
                            continue 'walk;
                        }
                    }
                }
                at += k;
            }
            found.push(Match {
                values: vars.iter().map(|v| bind[v].clone()).collect(),
                trace: PathRef {
                    nodes: wn.clone(),
                    edges: we.iter().map(|&j| edges[j].id.clone()).collect(),
                },
            });
        }
    }
    found.sort();
    if !vars.is_empty() {
        let mut seen = BTreeSet::new();
        found.retain(|m| seen.insert(m.values.clone()));
    }
    found
}

/// `(name, type, src)`
pub type NodeKey = (String, String, String);

/// A graph as plain sets of node keys and labeled key pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SetModel {
    pub nodes: BTreeSet<NodeKey>,
    pub edges: BTreeSet<(NodeKey, String, NodeKey)>,
}

impl SetModel {
    pub fn union(&mut self, source: &str, assertions: &[Assertion]) {
        for a in assertions {
            let k = |d: &EndpointDescriptor| (d.name.clone(), d.node_type.clone(), source.to_owned());
            let (s, d) = (k(&a.src), k(&a.dst));
            self.nodes.insert(s.clone());
            self.nodes.insert(d.clone());
            self.edges.insert((s, a.edge_type.split_whitespace().collect(), d));
        }
    }

    pub fn of(g: &Graph) -> SetModel {
        let key = |h: &NodeHandle| {
            let n = g.node(h).unwrap();
            (n.name.clone(), n.node_type.clone(), n.src.clone())
        };
        SetModel {
            nodes: g.nodes().map(|n| key(&n.handle)).collect(),
            edges: g.edges().map(|e| (key(&e.src), e.edge_type.clone(), key(&e.dst))).collect(),
        }
    }
}

/// Belief after feedback over a trust-shaped prior: `(1 + 4t + a) / (6 + a + d)`.
pub fn belief(trust: f64, approvals: u64, disapprovals: u64) -> f64 {
    (1.0 + 4.0 * trust + approvals as f64) / (6.0 + approvals as f64 + disapprovals as f64)
}

/// Counts after a verdict sequence, either keeping only each user's last
/// verdict or counting all of them.
pub fn tally(votes: &[(String, Verdict)], latest_wins: bool) -> (u64, u64) {
    let counted: Vec<Verdict> = if latest_wins {
        let mut last = BTreeMap::new();
        for (u, v) in votes {
            last.insert(u, *v);
        }
        last.into_values().collect()
    } else {
        votes.iter().map(|(_, v)| *v).collect()
    };
    let a = counted.iter().filter(|v| **v == Verdict::Approve).count() as u64;
    (a, counted.len() as u64 - a)
}

/// Degree histogram counting both edge directions.
pub fn degree_histogram(g: &Graph) -> BTreeMap<usize, usize> {
    let mut deg: BTreeMap<&NodeHandle, usize> = g.nodes().map(|n| (&n.handle, 0)).collect();
    for e in g.edges() {
        *deg.get_mut(&e.src).unwrap() += 1;
        *deg.get_mut(&e.dst).unwrap() += 1;
    }
    let mut hist = BTreeMap::new();
    for d in deg.into_values() {
        *hist.entry(d).or_insert(0) += 1;
    }
    hist
}
