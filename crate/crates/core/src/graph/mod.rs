//! In-memory typed directed concept graph.
//!
//! Nodes and edges carry beliefs; edges are set-semantic on
//! `(src, dst, edge_type)`. Structural repair happens through [`Graph::split`]
//! and [`Graph::merge`]. Retired handles are remembered so they are never
//! minted again.

mod matcher;
mod ops;
mod registry;
mod stats;
mod types;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use matcher::{Bound, Match, NodeConstraint, PathRef, Template, TemplateStep, DEFAULT_MAX_PATH_LEN};
pub use ops::{GraphOp, OpOutcome};
pub use registry::{EdgeTypeRegistry, DEFAULT_EDGE_TYPES};
pub use stats::DegreeStats;
pub use types::{
    Assertion, BeliefState, ConceptNode, Direction, EdgeId, EndpointDescriptor, FeatureKey,
    FeatureVector, FeedDelta, Lineage, LineageKind, NodeDescriptor, NodeHandle, Retirement, Side,
    TypedEdge, Verdict,
};

use types::IdentityKey;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("no live node {0}")]
    NodeNotFound(NodeHandle),
    #[error("no live edge {0}")]
    EdgeNotFound(EdgeId),
    #[error("unregistered edge type(s): {}", .0.join(", "))]
    UnknownEdgeType(Vec<String>),
    #[error("split of {node}: {reason}")]
    BadSplit { node: NodeHandle, reason: String },
    #[error("cannot merge {0} with itself")]
    SelfMerge(NodeHandle),
}

pub type Result<T> = std::result::Result<T, GraphError>;

#[derive(Debug, Clone, Default)]
struct Mint {
    seq: u64,
    next_node: u64,
    next_edge: u64,
}

#[derive(Debug, Clone, Default)]
struct Index {
    out: BTreeMap<NodeHandle, BTreeSet<EdgeId>>,
    inc: BTreeMap<NodeHandle, BTreeSet<EdgeId>>,
    triples: BTreeMap<(NodeHandle, NodeHandle, String), EdgeId>,
    identity: BTreeMap<IdentityKey, BTreeSet<NodeHandle>>,
    names: BTreeMap<String, BTreeSet<NodeHandle>>,
}

/// Case folding used for name matching.
pub fn fold_name(name: &str) -> String {
    name.trim().to_lowercase()
}

#[derive(Debug, Clone, Default)]
pub struct Graph {
    edge_types: EdgeTypeRegistry,
    nodes: BTreeMap<NodeHandle, ConceptNode>,
    edges: BTreeMap<EdgeId, TypedEdge>,
    retired_nodes: BTreeMap<NodeHandle, Retirement>,
    retired_edges: BTreeSet<EdgeId>,
    index: Index,
    mint: Mint,
    dirty: BTreeSet<NodeHandle>,
}

/// Serialized form: the live and retired content, without derived indexes.
#[derive(Serialize)]
struct StateRef<'a> {
    edge_types: &'a EdgeTypeRegistry,
    nodes: Vec<&'a ConceptNode>,
    edges: Vec<&'a TypedEdge>,
    retired_nodes: &'a BTreeMap<NodeHandle, Retirement>,
    retired_edges: &'a BTreeSet<EdgeId>,
}

#[derive(Deserialize)]
struct State {
    edge_types: EdgeTypeRegistry,
    nodes: Vec<ConceptNode>,
    edges: Vec<TypedEdge>,
    retired_nodes: BTreeMap<NodeHandle, Retirement>,
    retired_edges: BTreeSet<EdgeId>,
}

impl Serialize for Graph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StateRef {
            edge_types: &self.edge_types,
            nodes: self.nodes.values().collect(),
            edges: self.edges.values().collect(),
            retired_nodes: &self.retired_nodes,
            retired_edges: &self.retired_edges,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let state = State::deserialize(d)?;
        let mut g = Graph::new(state.edge_types);
        for node in state.nodes {
            g.index_node(&node);
            g.nodes.insert(node.handle.clone(), node);
        }
        for edge in state.edges {
            if !g.nodes.contains_key(&edge.src) || !g.nodes.contains_key(&edge.dst) {
                return Err(serde::de::Error::custom(format!(
                    "edge {} has a dangling endpoint",
                    edge.id
                )));
            }
            g.index_edge(&edge);
            g.edges.insert(edge.id.clone(), edge);
        }
        g.retired_nodes = state.retired_nodes;
        g.retired_edges = state.retired_edges;
        Ok(g)
    }
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.edge_types == other.edge_types
            && self.nodes == other.nodes
            && self.edges == other.edges
            && self.retired_nodes == other.retired_nodes
            && self.retired_edges == other.retired_edges
    }
}

impl Graph {
    pub fn new(edge_types: EdgeTypeRegistry) -> Self {
        Self {
            edge_types,
            ..Default::default()
        }
    }

    /// Canonical serialization; equal graphs produce identical bytes.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("graph state always serializes")
    }

    pub fn edge_types(&self) -> &EdgeTypeRegistry {
        &self.edge_types
    }

    pub fn edge_types_mut(&mut self) -> &mut EdgeTypeRegistry {
        &mut self.edge_types
    }

    /// Starts minting handles for the log record `seq`. Handles are
    /// `n{seq}_{i}` / `e{seq}_{i}` with `i` counting from zero per record.
    pub fn begin_record(&mut self, seq: u64) {
        if self.mint.seq != seq {
            self.mint = Mint {
                seq,
                next_node: 0,
                next_edge: 0,
            };
        }
    }

    fn mint_node(&mut self) -> NodeHandle {
        loop {
            let h = NodeHandle::new(format!("n{}_{}", self.mint.seq, self.mint.next_node));
            self.mint.next_node += 1;
            if !self.nodes.contains_key(&h) && !self.retired_nodes.contains_key(&h) {
                return h;
            }
        }
    }

    fn mint_edge(&mut self) -> EdgeId {
        loop {
            let id = EdgeId::new(format!("e{}_{}", self.mint.seq, self.mint.next_edge));
            self.mint.next_edge += 1;
            if !self.edges.contains_key(&id) && !self.retired_edges.contains(&id) {
                return id;
            }
        }
    }

    fn index_node(&mut self, node: &ConceptNode) {
        self.index
            .identity
            .entry(node.identity())
            .or_default()
            .insert(node.handle.clone());
        self.index
            .names
            .entry(fold_name(&node.name))
            .or_default()
            .insert(node.handle.clone());
    }

    fn unindex_node(&mut self, node: &ConceptNode) {
        if let Some(set) = self.index.identity.get_mut(&node.identity()) {
            set.remove(&node.handle);
            if set.is_empty() {
                self.index.identity.remove(&node.identity());
            }
        }
        let folded = fold_name(&node.name);
        if let Some(set) = self.index.names.get_mut(&folded) {
            set.remove(&node.handle);
            if set.is_empty() {
                self.index.names.remove(&folded);
            }
        }
        self.index.out.remove(&node.handle);
        self.index.inc.remove(&node.handle);
    }

    fn index_edge(&mut self, e: &TypedEdge) {
        self.index.out.entry(e.src.clone()).or_default().insert(e.id.clone());
        self.index.inc.entry(e.dst.clone()).or_default().insert(e.id.clone());
        self.index
            .triples
            .insert((e.src.clone(), e.dst.clone(), e.edge_type.clone()), e.id.clone());
        self.dirty.insert(e.src.clone());
        self.dirty.insert(e.dst.clone());
    }

    fn unindex_edge(&mut self, e: &TypedEdge) {
        if let Some(s) = self.index.out.get_mut(&e.src) {
            s.remove(&e.id);
        }
        if let Some(s) = self.index.inc.get_mut(&e.dst) {
            s.remove(&e.id);
        }
        let key = (e.src.clone(), e.dst.clone(), e.edge_type.clone());
        if self.index.triples.get(&key) == Some(&e.id) {
            self.index.triples.remove(&key);
        }
        self.dirty.insert(e.src.clone());
        self.dirty.insert(e.dst.clone());
    }

    // ---- reads ----

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, h: &NodeHandle) -> Option<&ConceptNode> {
        self.nodes.get(h)
    }

    pub fn edge(&self, id: &EdgeId) -> Option<&TypedEdge> {
        self.edges.get(id)
    }

    pub fn nodes(&self) -> impl Iterator<Item = &ConceptNode> {
        self.nodes.values()
    }

    pub fn edges(&self) -> impl Iterator<Item = &TypedEdge> {
        self.edges.values()
    }

    pub fn handles(&self) -> Vec<NodeHandle> {
        self.nodes.keys().cloned().collect()
    }

    pub fn retirement(&self, h: &NodeHandle) -> Option<&Retirement> {
        self.retired_nodes.get(h)
    }

    pub fn is_retired_edge(&self, id: &EdgeId) -> bool {
        self.retired_edges.contains(id)
    }

    pub fn contains_node(&self, h: &NodeHandle) -> bool {
        self.nodes.contains_key(h)
    }

    pub fn out_edges(&self, h: &NodeHandle) -> impl Iterator<Item = &TypedEdge> {
        self.index
            .out
            .get(h)
            .into_iter()
            .flatten()
            .filter_map(|id| self.edges.get(id))
    }

    pub fn in_edges(&self, h: &NodeHandle) -> impl Iterator<Item = &TypedEdge> {
        self.index
            .inc
            .get(h)
            .into_iter()
            .flatten()
            .filter_map(|id| self.edges.get(id))
    }

    /// Incident edge ids, sorted canonically.
    pub fn incident_edges(&self, h: &NodeHandle) -> Vec<EdgeId> {
        let mut ids: BTreeSet<EdgeId> = BTreeSet::new();
        if let Some(s) = self.index.out.get(h) {
            ids.extend(s.iter().cloned());
        }
        if let Some(s) = self.index.inc.get(h) {
            ids.extend(s.iter().cloned());
        }
        ids.into_iter().collect()
    }

    pub fn degree(&self, h: &NodeHandle) -> usize {
        self.index.out.get(h).map_or(0, BTreeSet::len) + self.index.inc.get(h).map_or(0, BTreeSet::len)
    }

    /// Live nodes whose case-folded name equals `name` (case-insensitive).
    pub fn nodes_named(&self, name: &str) -> Vec<NodeHandle> {
        self.index
            .names
            .get(&fold_name(name))
            .map(|s| s.iter().cloned().collect())
            .unwrap_or_default()
    }

    /// The preferred live node for a `(name, node_type, src)` identity key.
    pub fn find_node(&self, name: &str, node_type: &str, src: &str) -> Option<&NodeHandle> {
        self.index
            .identity
            .get(&(name.to_owned(), node_type.to_owned(), src.to_owned()))
            .and_then(|s| s.iter().next())
    }

    pub fn find_edge(&self, src: &NodeHandle, dst: &NodeHandle, edge_type: &str) -> Option<&EdgeId> {
        self.index
            .triples
            .get(&(src.clone(), dst.clone(), edge_type.to_owned()))
    }

    /// Drains the set of nodes whose incident edges changed since the last call.
    pub fn take_dirty(&mut self) -> Vec<NodeHandle> {
        std::mem::take(&mut self.dirty)
            .into_iter()
            .filter(|h| self.nodes.contains_key(h))
            .collect()
    }

    pub fn set_feature(&mut self, h: &NodeHandle, feature: FeatureVector) {
        if let Some(n) = self.nodes.get_mut(h) {
            n.feature = feature;
        }
    }

    pub fn node_belief_mut(&mut self, h: &NodeHandle) -> Option<&mut BeliefState> {
        self.nodes.get_mut(h).map(|n| &mut n.belief)
    }

    pub fn edge_belief_mut(&mut self, id: &EdgeId) -> Option<&mut BeliefState> {
        self.edges.get_mut(id).map(|e| &mut e.belief)
    }

    // ---- mutations ----

    /// Returns the node for `desc`, creating it if no node shares its
    /// `(name, node_type, src)` key. The flag reports whether it was created.
    pub fn add_node(&mut self, desc: &NodeDescriptor, trust: f64) -> Result<(NodeHandle, bool)> {
        validate_descriptor(desc)?;
        if let Some(h) = self.find_node(&desc.name, &desc.node_type, &desc.src) {
            return Ok((h.clone(), false));
        }
        let handle = self.mint_node();
        let node = ConceptNode {
            handle: handle.clone(),
            name: desc.name.clone(),
            node_type: desc.node_type.clone(),
            src: desc.src.clone(),
            media_ref: desc.media_ref.clone(),
            belief: BeliefState::from_trust(trust),
            feature: FeatureVector::default(),
            lineage: Vec::new(),
        };
        self.index_node(&node);
        self.nodes.insert(handle.clone(), node);
        self.dirty.insert(handle.clone());
        Ok((handle, true))
    }

    /// Adds `(src, dst, edge_type)`, or returns the existing edge for that triple.
    pub fn add_edge(
        &mut self,
        src: &NodeHandle,
        dst: &NodeHandle,
        edge_type: &str,
        source: &str,
        trust: f64,
    ) -> Result<(EdgeId, bool)> {
        for h in [src, dst] {
            if !self.nodes.contains_key(h) {
                return Err(GraphError::NodeNotFound(h.clone()));
            }
        }
        if !self.edge_types.contains(edge_type) {
            return Err(GraphError::UnknownEdgeType(vec![edge_type.to_owned()]));
        }
        if src == dst {
            return Err(GraphError::Validation(format!("self-loop on {src}")));
        }
        if let Some(id) = self.find_edge(src, dst, edge_type) {
            return Ok((id.clone(), false));
        }
        let id = self.mint_edge();
        let edge = TypedEdge {
            id: id.clone(),
            src: src.clone(),
            dst: dst.clone(),
            edge_type: edge_type.to_owned(),
            source: source.to_owned(),
            belief: BeliefState::from_trust(trust),
        };
        self.index_edge(&edge);
        self.edges.insert(id.clone(), edge);
        Ok((id, true))
    }

    /// Graph union with a batch of assertions from one source. Either every
    /// assertion applies or none does.
    pub fn apply_feed_union(&mut self, source: &str, trust: f64, assertions: &[Assertion]) -> Result<FeedDelta> {
        let unknown = self
            .edge_types
            .unknown(assertions.iter().map(|a| a.edge_type.as_str()));
        if !unknown.is_empty() {
            return Err(GraphError::UnknownEdgeType(unknown));
        }
        for a in assertions {
            let s = NodeDescriptor::from_endpoint(&a.src, source);
            let d = NodeDescriptor::from_endpoint(&a.dst, source);
            validate_descriptor(&s)?;
            validate_descriptor(&d)?;
            if s.identity() == d.identity() {
                return Err(GraphError::Validation(format!(
                    "assertion relates {:?} to itself",
                    a.src.name
                )));
            }
        }
        let mut delta = FeedDelta::default();
        for a in assertions {
            let (src, new_src) = self.add_node(&NodeDescriptor::from_endpoint(&a.src, source), trust)?;
            if new_src {
                delta.added_nodes.push(src.clone());
            }
            let (dst, new_dst) = self.add_node(&NodeDescriptor::from_endpoint(&a.dst, source), trust)?;
            if new_dst {
                delta.added_nodes.push(dst.clone());
            }
            let (id, new_edge) = self.add_edge(&src, &dst, &a.edge_type, source, trust)?;
            if new_edge {
                delta.added_edges.push(id);
            }
        }
        Ok(delta)
    }

    /// Splits `node` into two successors. `assignment` must name every
    /// incident edge exactly once and put at least one edge on each side.
    pub fn split(&mut self, node: &NodeHandle, assignment: &BTreeMap<EdgeId, Side>) -> Result<(NodeHandle, NodeHandle)> {
        let original = self
            .nodes
            .get(node)
            .cloned()
            .ok_or_else(|| GraphError::NodeNotFound(node.clone()))?;
        let incident = self.incident_edges(node);
        let bad = |reason: String| GraphError::BadSplit {
            node: node.clone(),
            reason,
        };
        if incident.len() != assignment.len() || incident.iter().any(|e| !assignment.contains_key(e)) {
            return Err(bad("assignment must cover exactly the incident edges".into()));
        }
        let ones = assignment.values().filter(|s| **s == Side::One).count();
        if ones == 0 || ones == assignment.len() {
            return Err(bad("both sides must receive at least one edge".into()));
        }

        let successors = [self.mint_node(), self.mint_node()];
        self.retire_node_entry(node, Retirement::Split {
            successors: successors.clone(),
        });
        for h in &successors {
            let n = ConceptNode {
                handle: h.clone(),
                lineage: vec![Lineage {
                    kind: LineageKind::Split,
                    from: node.clone(),
                }],
                feature: FeatureVector::default(),
                ..original.clone()
            };
            self.index_node(&n);
            self.nodes.insert(h.clone(), n);
            self.dirty.insert(h.clone());
        }
        for (id, side) in assignment {
            let mut e = self.edges.remove(id).expect("incident edge is live");
            self.unindex_edge(&e);
            let to = &successors[side.index()];
            if &e.src == node {
                e.src = to.clone();
            }
            if &e.dst == node {
                e.dst = to.clone();
            }
            self.index_edge(&e);
            self.edges.insert(id.clone(), e);
        }
        let [a, b] = successors;
        Ok((a, b))
    }

    /// Merges `b` into `a`. `a` keeps its handle; `b`'s edges are re-pointed,
    /// duplicate triples collapse (belief counts add) and self-loops are dropped.
    pub fn merge(&mut self, a: &NodeHandle, b: &NodeHandle) -> Result<NodeHandle> {
        if a == b {
            return Err(GraphError::SelfMerge(a.clone()));
        }
        for h in [a, b] {
            if !self.nodes.contains_key(h) {
                return Err(GraphError::NodeNotFound(h.clone()));
            }
        }
        for id in self.incident_edges(b) {
            let mut e = self.edges.remove(&id).expect("incident edge is live");
            self.unindex_edge(&e);
            if &e.src == b {
                e.src = a.clone();
            }
            if &e.dst == b {
                e.dst = a.clone();
            }
            if e.src == e.dst {
                self.retired_edges.insert(id);
                continue;
            }
            if let Some(existing) = self.find_edge(&e.src, &e.dst, &e.edge_type).cloned() {
                let survivor = self.edges.get_mut(&existing).expect("indexed edge is live");
                survivor.belief.absorb(&e.belief);
                self.retired_edges.insert(id);
                continue;
            }
            self.index_edge(&e);
            self.edges.insert(id, e);
        }
        let absorbed = self.nodes.get(b).expect("checked above").belief.clone();
        self.retire_node_entry(b, Retirement::Merged { into: a.clone() });
        let survivor = self.nodes.get_mut(a).expect("checked above");
        survivor.belief.absorb(&absorbed);
        survivor.lineage.push(Lineage {
            kind: LineageKind::Merge,
            from: b.clone(),
        });
        self.dirty.insert(a.clone());
        Ok(a.clone())
    }

    /// Retires a node together with its incident edges.
    pub fn delete_node(&mut self, h: &NodeHandle) -> Result<Vec<EdgeId>> {
        if !self.nodes.contains_key(h) {
            return Err(GraphError::NodeNotFound(h.clone()));
        }
        let incident = self.incident_edges(h);
        for id in &incident {
            self.retire_edge_entry(id);
        }
        self.retire_node_entry(h, Retirement::Deleted);
        Ok(incident)
    }

    pub fn delete_edge(&mut self, id: &EdgeId) -> Result<()> {
        if !self.edges.contains_key(id) {
            return Err(GraphError::EdgeNotFound(id.clone()));
        }
        self.retire_edge_entry(id);
        Ok(())
    }

    fn retire_edge_entry(&mut self, id: &EdgeId) {
        if let Some(e) = self.edges.remove(id) {
            self.unindex_edge(&e);
            self.retired_edges.insert(id.clone());
        }
    }

    fn retire_node_entry(&mut self, h: &NodeHandle, why: Retirement) {
        if let Some(n) = self.nodes.remove(h) {
            self.unindex_node(&n);
            self.retired_nodes.insert(h.clone(), why);
            self.dirty.remove(h);
        }
    }
}

fn validate_descriptor(desc: &NodeDescriptor) -> Result<()> {
    if desc.name.trim().is_empty() {
        return Err(GraphError::Validation("node name must be nonempty".into()));
    }
    if desc.node_type.trim().is_empty() {
        return Err(GraphError::Validation("node type must be nonempty".into()));
    }
    Ok(())
}
