//! Post-union inference: connectivity features and split/merge proposals.
//!
//! A node's feature vector counts `(edge_type, direction, neighbor-name token)`
//! over its incident edges and is L2-normalized. Each incident edge also has
//! its own context vector (the same construction restricted to that edge).
//!
//! Two kinds of proposals come out of a feed delta:
//!
//! * **split + merge**: the incident-edge contexts of a node 2-cluster with
//!   inter-medoid similarity below `tau_split`, and one cluster's dominant
//!   token names another live, non-adjacent node of the same type. The node
//!   is split along the clusters and the matching successor is merged into
//!   the named node.
//! * **merge**: two nodes share a case-folded name and node type, come from
//!   different sources, and have feature similarity of at least `tau_merge`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::exec::Execution;
use crate::graph::{
    fold_name, EdgeId, FeatureKey, FeatureVector, FeedDelta, Graph, GraphError, GraphOp,
    NodeHandle, OpOutcome, Side, TypedEdge, DEFAULT_MAX_PATH_LEN,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct InferenceConfig {
    pub tau_merge: f64,
    pub tau_split: f64,
    pub max_path_len: usize,
}

impl Default for InferenceConfig {
    fn default() -> Self {
        Self {
            tau_merge: 0.6,
            tau_split: 0.2,
            max_path_len: DEFAULT_MAX_PATH_LEN,
        }
    }
}

/// Lowercased alphanumeric tokens of a name; purely numeric tokens are
/// dropped ("cup 2" -> ["cup"]). A name with no other tokens is its own token.
pub fn name_tokens(name: &str) -> Vec<String> {
    let tokens: Vec<String> = name
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty() && !t.chars().all(|c| c.is_ascii_digit()))
        .map(str::to_lowercase)
        .collect();
    if tokens.is_empty() && !name.trim().is_empty() {
        vec![fold_name(name)]
    } else {
        tokens
    }
}

fn edge_counts(graph: &Graph, node: &NodeHandle, edge: &TypedEdge, into: &mut BTreeMap<FeatureKey, f64>) {
    let Some((other, direction)) = edge.other_end(node) else {
        return;
    };
    let Some(other) = graph.node(other) else { return };
    for token in name_tokens(&other.name) {
        *into
            .entry(FeatureKey {
                edge_type: edge.edge_type.clone(),
                direction,
                token,
            })
            .or_insert(0.0) += 1.0;
    }
}

/// Context vector of a single incident edge, seen from `node`.
pub fn edge_context(graph: &Graph, node: &NodeHandle, edge: &TypedEdge) -> FeatureVector {
    let mut counts = BTreeMap::new();
    edge_counts(graph, node, edge, &mut counts);
    FeatureVector::from_counts(counts)
}

pub fn compute_feature_vector(graph: &Graph, node: &NodeHandle) -> Result<FeatureVector, GraphError> {
    if !graph.contains_node(node) {
        return Err(GraphError::NodeNotFound(node.clone()));
    }
    let mut counts = BTreeMap::new();
    for id in graph.incident_edges(node) {
        let e = graph.edge(&id).expect("incident edge is live");
        edge_counts(graph, node, e, &mut counts);
    }
    Ok(FeatureVector::from_counts(counts))
}

/// Cosine similarity; zero when either vector is zero.
pub fn similarity(a: &FeatureVector, b: &FeatureVector) -> f64 {
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (a.dot(b) / (na * nb)).clamp(-1.0, 1.0)
}

/// Recomputes stored features for every node whose neighborhood changed.
pub fn refresh_features(graph: &mut Graph, exec: Execution) -> usize {
    let dirty = graph.take_dirty();
    let fresh = exec.map(&dirty, |h| compute_feature_vector(graph, h).unwrap_or_default());
    for (h, f) in dirty.iter().zip(fresh) {
        graph.set_feature(h, f);
    }
    dirty.len()
}

/// Reference to a node that may only exist once earlier proposals are applied.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpTarget {
    Live(NodeHandle),
    /// Successor `side` of the split at position `split` in the same list.
    SplitSuccessor { split: usize, side: Side },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProposalKind {
    Split {
        node: NodeHandle,
        assignment: BTreeMap<EdgeId, Side>,
    },
    Merge {
        a: OpTarget,
        b: OpTarget,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphOpProposal {
    #[serde(flatten)]
    pub kind: ProposalKind,
    pub score: f64,
    pub rationale: String,
}

impl GraphOpProposal {
    pub fn is_split(&self) -> bool {
        matches!(self.kind, ProposalKind::Split { .. })
    }

    pub fn is_merge(&self) -> bool {
        matches!(self.kind, ProposalKind::Merge { .. })
    }
}

/// Result of a deterministic 2-medoid clustering of edge contexts.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoMedoids {
    /// Cluster index (0 or 1) per input item.
    pub labels: Vec<usize>,
    pub medoids: [usize; 2],
    pub inter_similarity: f64,
}

/// Clusters `items` around two medoids. Seeds are the most dissimilar pair
/// (first in index order on ties); items join the more similar medoid
/// (cluster 0 on ties); each medoid is then the member with the largest
/// similarity sum (lowest index on ties). Needs at least two items.
pub fn two_medoids(items: &[FeatureVector]) -> Option<TwoMedoids> {
    let n = items.len();
    if n < 2 {
        return None;
    }
    let sim: Vec<Vec<f64>> = items
        .iter()
        .map(|a| items.iter().map(|b| similarity(a, b)).collect())
        .collect();
    let mut medoids = [0, 1];
    let mut lowest = f64::INFINITY;
    for (i, row) in sim.iter().enumerate() {
        for (j, &s) in row.iter().enumerate().skip(i + 1) {
            if s < lowest {
                lowest = s;
                medoids = [i, j];
            }
        }
    }
    let mut labels = vec![0; n];
    for _ in 0..64 {
        for (k, label) in labels.iter_mut().enumerate() {
            *label = if k == medoids[0] {
                0
            } else {
                usize::from(k == medoids[1] || sim[k][medoids[1]] > sim[k][medoids[0]])
            };
        }
        let mut next = medoids;
        for (c, slot) in next.iter_mut().enumerate() {
            let members: Vec<usize> = (0..n).filter(|k| labels[*k] == c).collect();
            let mut best = (f64::NEG_INFINITY, usize::MAX);
            for &m in &members {
                let total: f64 = members.iter().map(|&o| sim[m][o]).sum();
                if total > best.0 {
                    best = (total, m);
                }
            }
            *slot = best.1;
        }
        if next == medoids {
            break;
        }
        medoids = next;
    }
    Some(TwoMedoids {
        inter_similarity: sim[medoids[0]][medoids[1]],
        labels,
        medoids,
    })
}

/// Highest-weight token over a set of context vectors (smallest on ties).
fn dominant_token(contexts: &[&FeatureVector]) -> Option<String> {
    let mut weight: BTreeMap<&str, f64> = BTreeMap::new();
    for c in contexts {
        for (k, w) in c.entries() {
            *weight.entry(k.token.as_str()).or_insert(0.0) += w;
        }
    }
    let mut best: Option<(&str, f64)> = None;
    for (t, w) in weight {
        if best.is_none_or(|(_, bw)| w > bw) {
            best = Some((t, w));
        }
    }
    best.map(|(t, _)| t.to_owned())
}

struct SplitGroup {
    node: NodeHandle,
    assignment: BTreeMap<EdgeId, Side>,
    target: NodeHandle,
    score: f64,
    token: String,
}

fn evaluate_split(graph: &Graph, node: &NodeHandle, tau_split: f64) -> Option<SplitGroup> {
    let me = graph.node(node)?;
    let edges = graph.incident_edges(node);
    if edges.len() < 2 {
        return None;
    }
    let contexts: Vec<FeatureVector> = edges
        .iter()
        .map(|id| edge_context(graph, node, graph.edge(id).expect("incident edge is live")))
        .collect();
    let clusters = two_medoids(&contexts)?;
    if clusters.inter_similarity >= tau_split {
        return None;
    }
    let neighbors: BTreeSet<&NodeHandle> = edges
        .iter()
        .filter_map(|id| graph.edge(id)?.other_end(node).map(|(h, _)| h))
        .collect();
    let own = fold_name(&me.name);
    let sizes = [0, 1].map(|c| clusters.labels.iter().filter(|l| **l == c).count());

    let mut found: Vec<(usize, String, NodeHandle)> = Vec::new();
    for c in [0, 1] {
        let members: Vec<&FeatureVector> = contexts
            .iter()
            .zip(&clusters.labels)
            .filter(|(_, l)| **l == c)
            .map(|(v, _)| v)
            .collect();
        let Some(token) = dominant_token(&members) else {
            continue;
        };
        if token == own {
            continue;
        }
        let target = graph.nodes_named(&token).into_iter().find(|h| {
            h != node
                && !neighbors.contains(h)
                && graph.node(h).is_some_and(|n| n.node_type == me.node_type)
        });
        if let Some(t) = target {
            found.push((c, token, t));
        }
    }
    // with two candidates, the smaller cluster is the one split off
    let (cluster, token, target) = match found.len() {
        0 => return None,
        1 => found.pop()?,
        _ if sizes[0] < sizes[1] => found.swap_remove(0),
        _ => found.swap_remove(1),
    };
    let assignment = edges
        .iter()
        .zip(&clusters.labels)
        .map(|(id, l)| (id.clone(), if *l == cluster { Side::One } else { Side::Zero }))
        .collect();
    Some(SplitGroup {
        node: node.clone(),
        assignment,
        target,
        score: (1.0 - clusters.inter_similarity).clamp(0.0, 1.0),
        token,
    })
}

/// Nodes whose split is worth evaluating for this delta: everything the
/// delta touched plus nodes with an incident edge whose neighbor-name tokens
/// mention a touched node's name.
fn split_candidates(graph: &Graph, touched: &BTreeSet<NodeHandle>, exec: Execution) -> Vec<NodeHandle> {
    let names: BTreeSet<String> = touched
        .iter()
        .filter_map(|h| graph.node(h))
        .map(|n| fold_name(&n.name))
        .collect();
    let all = graph.handles();
    let flags = exec.map(&all, |h| {
        touched.contains(h)
            || graph.incident_edges(h).iter().any(|id| {
                graph
                    .edge(id)
                    .and_then(|e| e.other_end(h))
                    .and_then(|(o, _)| graph.node(o))
                    .is_some_and(|o| name_tokens(&o.name).iter().any(|t| names.contains(t)))
            })
    });
    all.into_iter().zip(flags).filter(|(_, f)| *f).map(|(h, _)| h).collect()
}

fn touched_nodes(graph: &Graph, delta: &FeedDelta) -> BTreeSet<NodeHandle> {
    let mut touched: BTreeSet<NodeHandle> = delta.added_nodes.iter().cloned().collect();
    for id in &delta.added_edges {
        if let Some(e) = graph.edge(id) {
            touched.insert(e.src.clone());
            touched.insert(e.dst.clone());
        }
    }
    touched.retain(|h| graph.contains_node(h));
    touched
}

/// Computes the split/merge proposals for a freshly applied delta. The list
/// is ordered by descending score and applies cleanly in order.
pub fn propose_updates(graph: &Graph, delta: &FeedDelta, config: &InferenceConfig, exec: Execution) -> Vec<GraphOpProposal> {
    let touched = touched_nodes(graph, delta);
    if touched.is_empty() {
        return Vec::new();
    }

    let candidates = split_candidates(graph, &touched, exec);
    let splits: Vec<SplitGroup> = exec
        .map(&candidates, |h| evaluate_split(graph, h, config.tau_split))
        .into_iter()
        .flatten()
        .collect();
    let mut reserved: BTreeSet<NodeHandle> = BTreeSet::new();
    let mut groups: Vec<(f64, Vec<GraphOpProposal>)> = Vec::new();
    for s in splits {
        if reserved.contains(&s.node) || reserved.contains(&s.target) {
            continue;
        }
        reserved.insert(s.node.clone());
        reserved.insert(s.target.clone());
        let rationale = format!(
            "edges of {} separate (inter-medoid similarity {:.3}); the split-off side is about '{}'",
            s.node,
            1.0 - s.score,
            s.token
        );
        groups.push((
            s.score,
            vec![
                GraphOpProposal {
                    kind: ProposalKind::Split {
                        node: s.node.clone(),
                        assignment: s.assignment,
                    },
                    score: s.score,
                    rationale,
                },
                GraphOpProposal {
                    kind: ProposalKind::Merge {
                        a: OpTarget::Live(s.target.clone()),
                        b: OpTarget::SplitSuccessor { split: 0, side: Side::One },
                    },
                    score: s.score,
                    rationale: format!("split-off side of {} denotes {}", s.node, s.target),
                },
            ],
        ));
    }

    for (a, b, score) in merge_pairs(graph, &touched, &delta.added_nodes, &reserved, config, exec) {
        groups.push((
            score,
            vec![GraphOpProposal {
                kind: ProposalKind::Merge {
                    a: OpTarget::Live(a.clone()),
                    b: OpTarget::Live(b.clone()),
                },
                score,
                rationale: format!("{a} and {b} share name and type across sources (similarity {score:.3})"),
            }],
        ));
    }

    groups.sort_by(|x, y| y.0.total_cmp(&x.0));
    let mut out: Vec<GraphOpProposal> = Vec::new();
    for (_, group) in groups {
        let base = out.len();
        for mut p in group {
            if let ProposalKind::Merge { b: OpTarget::SplitSuccessor { split, .. }, .. } = &mut p.kind {
                *split += base;
            }
            out.push(p);
        }
    }
    out
}

/// Same-name, same-type, cross-source pairs above `tau_merge`, resolved
/// greedily by score so chains of merges always name live survivors.
fn merge_pairs(
    graph: &Graph,
    touched: &BTreeSet<NodeHandle>,
    added: &[NodeHandle],
    reserved: &BTreeSet<NodeHandle>,
    config: &InferenceConfig,
    exec: Execution,
) -> Vec<(NodeHandle, NodeHandle, f64)> {
    let added: BTreeSet<&NodeHandle> = added.iter().collect();
    let mut pairs: BTreeSet<(NodeHandle, NodeHandle)> = BTreeSet::new();
    for t in touched.iter().filter(|h| !reserved.contains(*h)) {
        let me = graph.node(t).expect("touched nodes are live");
        for u in graph.nodes_named(&me.name) {
            if &u == t || reserved.contains(&u) {
                continue;
            }
            let other = graph.node(&u).expect("indexed node is live");
            if other.node_type != me.node_type || other.src == me.src {
                continue;
            }
            // survivor: the pre-existing node, else the canonical first
            let (a, b) = match (added.contains(t), added.contains(&u)) {
                (true, false) => (u.clone(), t.clone()),
                (false, true) => (t.clone(), u.clone()),
                _ if *t < u => (t.clone(), u.clone()),
                _ => (u.clone(), t.clone()),
            };
            pairs.insert((a, b));
        }
    }
    let pairs: Vec<(NodeHandle, NodeHandle)> = pairs.into_iter().collect();
    let scored = exec.map(&pairs, |(a, b)| {
        let fa = compute_feature_vector(graph, a).unwrap_or_default();
        let fb = compute_feature_vector(graph, b).unwrap_or_default();
        similarity(&fa, &fb)
    });
    let mut ranked: Vec<(NodeHandle, NodeHandle, f64)> = pairs
        .into_iter()
        .zip(scored)
        .filter(|(_, s)| *s >= config.tau_merge)
        .map(|((a, b), s)| (a, b, s))
        .collect();
    ranked.sort_by(|x, y| y.2.total_cmp(&x.2).then_with(|| (&x.0, &x.1).cmp(&(&y.0, &y.1))));

    let mut parent: BTreeMap<NodeHandle, NodeHandle> = BTreeMap::new();
    let find = |parent: &BTreeMap<NodeHandle, NodeHandle>, mut h: NodeHandle| {
        while let Some(p) = parent.get(&h) {
            h = p.clone();
        }
        h
    };
    let mut out = Vec::new();
    for (a, b, s) in ranked {
        let (ra, rb) = (find(&parent, a), find(&parent, b));
        if ra == rb {
            continue;
        }
        parent.insert(rb.clone(), ra.clone());
        out.push((ra, rb, s));
    }
    out
}

/// Resolves a proposal against the outcomes of the proposals applied before it.
pub fn resolve(proposal: &GraphOpProposal, outcomes: &[OpOutcome]) -> Result<GraphOp, GraphError> {
    let target = |t: &OpTarget| -> Result<NodeHandle, GraphError> {
        match t {
            OpTarget::Live(h) => Ok(h.clone()),
            OpTarget::SplitSuccessor { split, side } => match outcomes.get(*split) {
                Some(OpOutcome::Split { successors }) => Ok(successors[side.index()].clone()),
                _ => Err(GraphError::Validation(format!(
                    "proposal refers to split #{split}, which has not been applied"
                ))),
            },
        }
    };
    Ok(match &proposal.kind {
        ProposalKind::Split { node, assignment } => GraphOp::Split {
            node: node.clone(),
            assignment: assignment.clone(),
        },
        ProposalKind::Merge { a, b } => GraphOp::Merge {
            a: target(a)?,
            b: target(b)?,
        },
    })
}

/// Applies proposals in order and returns the concrete operations performed.
pub fn apply_proposals(graph: &mut Graph, proposals: &[GraphOpProposal]) -> Result<Vec<GraphOp>, GraphError> {
    let mut outcomes = Vec::with_capacity(proposals.len());
    let mut ops = Vec::with_capacity(proposals.len());
    for p in proposals {
        let op = resolve(p, &outcomes)?;
        outcomes.push(graph.apply_op(&op)?);
        ops.push(op);
    }
    Ok(ops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Assertion, Direction, EdgeTypeRegistry, EndpointDescriptor};

    fn word(n: &str) -> EndpointDescriptor {
        EndpointDescriptor::new(n, "Word")
    }

    fn image(n: &str) -> EndpointDescriptor {
        EndpointDescriptor::new(n, "Image")
    }

    #[test]
    fn tokens_drop_numbers() {
        assert_eq!(name_tokens("cup 2"), ["cup"]);
        assert_eq!(name_tokens("Mug_Image-01"), ["mug", "image"]);
        assert_eq!(name_tokens("42"), ["42"]);
        assert!(name_tokens("").is_empty());
    }

    #[test]
    fn feature_examples() {
        let mut g = Graph::new(EdgeTypeRegistry::default());
        g.apply_feed_union("t", 0.5, &[Assertion::new(word("a"), "CanUse", word("cup"))])
            .unwrap();
        let a = g.find_node("a", "Word", "t").unwrap().clone();
        let f = compute_feature_vector(&g, &a).unwrap();
        assert_eq!(f.len(), 1);
        let key = FeatureKey {
            edge_type: "CanUse".into(),
            direction: Direction::Out,
            token: "cup".into(),
        };
        assert_eq!(f.get(&key), 1.0);

        let (iso, _) = g
            .add_node(&crate::graph::NodeDescriptor::new("lonely", "Word", "t"), 0.5)
            .unwrap();
        assert!(compute_feature_vector(&g, &iso).unwrap().is_zero());
        assert!(matches!(
            compute_feature_vector(&g, &NodeHandle::from("zz")),
            Err(GraphError::NodeNotFound(_))
        ));
    }

    #[test]
    fn identical_neighborhoods_identical_vectors() {
        let mut g = Graph::new(EdgeTypeRegistry::default());
        g.apply_feed_union(
            "t",
            0.5,
            &[
                Assertion::new(word("a"), "CanUse", word("cup")),
                Assertion::new(word("b"), "CanUse", word("cup")),
            ],
        )
        .unwrap();
        let a = compute_feature_vector(&g, g.find_node("a", "Word", "t").unwrap()).unwrap();
        let b = compute_feature_vector(&g, g.find_node("b", "Word", "t").unwrap()).unwrap();
        assert_eq!(a, b);
        assert!((similarity(&a, &b) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn similarity_examples() {
        let key = |t: &str| FeatureKey {
            edge_type: "X".into(),
            direction: Direction::Out,
            token: t.into(),
        };
        let x = FeatureVector::from_counts([(key("a"), 1.0)].into());
        let y = FeatureVector::from_counts([(key("a"), 1.0), (key("b"), 1.0)].into());
        let z = FeatureVector::from_counts([(key("c"), 1.0)].into());
        assert!((similarity(&x, &x) - 1.0).abs() < 1e-12);
        assert_eq!(similarity(&x, &z), 0.0);
        assert!((similarity(&x, &y) - 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(similarity(&x, &FeatureVector::default()), 0.0);
    }

    /// The Cup/Mug scenario: five incident edges on Cup, two of which show mugs.
    fn cup_graph() -> Graph {
        let mut g = Graph::new(EdgeTypeRegistry::default());
        g.begin_record(1);
        g.apply_feed_union(
            "kb",
            0.5,
            &[
                Assertion::new(word("Cup"), "HasAppearance", image("cup 1")),
                Assertion::new(word("Cup"), "HasAppearance", image("cup 2")),
                Assertion::new(word("Cup"), "HasAppearance", image("mug 1")),
                Assertion::new(word("Cup"), "HasAppearance", image("mug 2")),
                Assertion::new(word("Cup"), "IsTypeOf", word("Container")),
                Assertion::new(word("SittingHuman"), "IsTypeOf", word("Human")),
            ],
        )
        .unwrap();
        g
    }

    #[test]
    fn cup_is_not_split_before_a_mug_concept_exists() {
        let g = cup_graph();
        let all = FeedDelta {
            added_nodes: g.handles(),
            added_edges: g.edges().map(|e| e.id.clone()).collect(),
        };
        assert!(propose_updates(&g, &all, &InferenceConfig::default(), Execution::Sequential).is_empty());
    }

    #[test]
    fn mug_feed_yields_split_then_merge() {
        let mut g = cup_graph();
        g.begin_record(2);
        let delta = g
            .apply_feed_union("kb", 0.5, &[Assertion::new(word("SittingHuman"), "CanUse", word("Mug"))])
            .unwrap();
        let props = propose_updates(&g, &delta, &InferenceConfig::default(), Execution::Parallel);
        assert_eq!(props.len(), 2, "{props:#?}");
        let cup = g.find_node("Cup", "Word", "kb").unwrap().clone();
        let mug = g.find_node("Mug", "Word", "kb").unwrap().clone();
        let ProposalKind::Split { node, assignment } = &props[0].kind else {
            panic!("expected split first: {props:#?}");
        };
        assert_eq!(node, &cup);
        // mug images on side 1, the rest on side 0
        for (id, side) in assignment {
            let e = g.edge(id).unwrap();
            let other = g.node(&e.other_end(&cup).unwrap().0.clone()).unwrap();
            let expect = if other.name.starts_with("mug") { Side::One } else { Side::Zero };
            assert_eq!(*side, expect, "{}", other.name);
        }
        assert_eq!(
            props[1].kind,
            ProposalKind::Merge {
                a: OpTarget::Live(mug.clone()),
                b: OpTarget::SplitSuccessor { split: 0, side: Side::One }
            }
        );

        g.begin_record(3);
        apply_proposals(&mut g, &props).unwrap();
        let cups = g.nodes_named("cup");
        assert_eq!(cups.len(), 1);
        let names = |h: &NodeHandle| -> BTreeSet<String> {
            g.incident_edges(h)
                .iter()
                .map(|id| {
                    let e = g.edge(id).unwrap();
                    g.node(e.other_end(h).unwrap().0).unwrap().name.clone()
                })
                .collect()
        };
        assert_eq!(names(&cups[0]), BTreeSet::from(["cup 1".into(), "cup 2".into(), "Container".into()]));
        assert_eq!(names(&mug), BTreeSet::from(["mug 1".into(), "mug 2".into(), "SittingHuman".into()]));
    }

    #[test]
    fn polysemous_names_with_disjoint_context_do_not_merge() {
        let mut g = Graph::new(EdgeTypeRegistry::default());
        g.apply_feed_union("botany", 0.5, &[Assertion::new(word("plant"), "IsTypeOf", word("tree"))])
            .unwrap();
        let delta = g
            .apply_feed_union("industry", 0.5, &[Assertion::new(word("plant"), "IsTypeOf", word("factory"))])
            .unwrap();
        let plants = g.nodes_named("plant");
        let s = similarity(
            &compute_feature_vector(&g, &plants[0]).unwrap(),
            &compute_feature_vector(&g, &plants[1]).unwrap(),
        );
        assert_eq!(s, 0.0);
        assert!(propose_updates(&g, &delta, &InferenceConfig::default(), Execution::Sequential).is_empty());
    }

    #[test]
    fn cross_source_duplicates_merge_into_the_older_node() {
        let mut g = Graph::new(EdgeTypeRegistry::default());
        g.apply_feed_union("a", 0.5, &[Assertion::new(word("egg"), "HasAttribute", word("fragile"))])
            .unwrap();
        let old = g.find_node("egg", "Word", "a").unwrap().clone();
        let delta = g
            .apply_feed_union("b", 0.5, &[Assertion::new(word("egg"), "HasAttribute", word("fragile"))])
            .unwrap();
        let props = propose_updates(&g, &delta, &InferenceConfig::default(), Execution::Sequential);
        // egg and fragile both pair up across sources
        assert_eq!(props.len(), 2);
        assert!(props.iter().all(|p| p.is_merge() && (p.score - 1.0).abs() < 1e-12));
        assert!(props.iter().any(|p| matches!(&p.kind, ProposalKind::Merge { a: OpTarget::Live(a), .. } if *a == old)));
        apply_proposals(&mut g, &props).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn three_way_duplicates_chain_through_survivors() {
        let mut g = Graph::new(EdgeTypeRegistry::default());
        for src in ["a", "b"] {
            g.apply_feed_union(src, 0.5, &[Assertion::new(word("knife"), "HasAttribute", word("sharp"))])
                .unwrap();
        }
        let mut delta = FeedDelta::default();
        for h in g.handles() {
            delta.added_nodes.push(h);
        }
        let d = g
            .apply_feed_union("c", 0.5, &[Assertion::new(word("knife"), "HasAttribute", word("sharp"))])
            .unwrap();
        delta.added_nodes.extend(d.added_nodes);
        let props = propose_updates(&g, &delta, &InferenceConfig::default(), Execution::Sequential);
        apply_proposals(&mut g, &props).unwrap();
        assert_eq!(g.nodes_named("knife").len(), 1);
        assert_eq!(g.nodes_named("sharp").len(), 1);
    }

    #[test]
    fn two_medoid_hand_oracle() {
        let key = |t: &str| FeatureKey {
            edge_type: "HasAppearance".into(),
            direction: Direction::Out,
            token: t.into(),
        };
        let v = |t: &str| FeatureVector::from_counts([(key(t), 1.0)].into());
        // cup, cup, mug, mug, container: seeds (0, 2); container ties into cluster 0
        let items = [v("cup"), v("cup"), v("mug"), v("mug"), v("container")];
        let c = two_medoids(&items).unwrap();
        assert_eq!(c.medoids, [0, 2]);
        assert_eq!(c.labels, [0, 0, 1, 1, 0]);
        assert_eq!(c.inter_similarity, 0.0);
        assert!(two_medoids(&items[..1]).is_none());
    }

    #[test]
    fn refresh_updates_dirty_features() {
        let mut g = cup_graph();
        let n = refresh_features(&mut g, Execution::Parallel);
        assert_eq!(n, g.node_count());
        let cup = g.find_node("Cup", "Word", "kb").unwrap().clone();
        assert!((g.node(&cup).unwrap().feature.norm() - 1.0).abs() < 1e-12);
        assert_eq!(refresh_features(&mut g, Execution::Parallel), 0);
    }
}
