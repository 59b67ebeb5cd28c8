use std::collections::{BTreeMap, BTreeSet, VecDeque};

use brain_core::eval::Value;
use brain_core::graph::{EdgeId, Graph, NodeHandle};
use serde::Serialize;
use serde_json::Value as Json;

#[derive(Debug, Clone, Serialize)]
pub struct SubgraphView {
    pub center: NodeHandle,
    pub radius: usize,
    pub nodes: Vec<Json>,
    pub edges: Vec<Json>,
    /// The node limit cut the neighbourhood short.
    pub truncated: bool,
}

/// Nodes within `radius` undirected hops of `center`, breadth first with
/// neighbours in handle order, plus every edge among them.
pub fn subgraph(graph: &Graph, center: &NodeHandle, radius: usize, limit: usize) -> Option<SubgraphView> {
    graph.node(center)?;
    let mut depth: BTreeMap<NodeHandle, usize> = BTreeMap::from([(center.clone(), 0)]);
    let mut order = vec![center.clone()];
    let mut queue = VecDeque::from([center.clone()]);
    let mut truncated = false;
    'bfs: while let Some(h) = queue.pop_front() {
        let d = depth[&h];
        if d == radius {
            continue;
        }
        let neighbours: BTreeSet<NodeHandle> = graph
            .incident_edges(&h)
            .iter()
            .filter_map(|id| graph.edge(id)?.other_end(&h).map(|(n, _)| n.clone()))
            .collect();
        for n in neighbours {
            if depth.contains_key(&n) {
                continue;
            }
            if order.len() >= limit {
                truncated = true;
                break 'bfs;
            }
            depth.insert(n.clone(), d + 1);
            order.push(n.clone());
            queue.push_back(n);
        }
    }
    let edges: BTreeSet<EdgeId> = order
        .iter()
        .flat_map(|h| graph.incident_edges(h))
        .filter(|id| {
            graph
                .edge(id)
                .is_some_and(|e| depth.contains_key(&e.src) && depth.contains_key(&e.dst))
        })
        .collect();
    let nodes = order
        .iter()
        .map(|h| {
            let mut j = Value::Node(h.clone()).to_json(graph);
            j["degree"] = graph.degree(h).into();
            j
        })
        .collect();
    Some(SubgraphView {
        center: center.clone(),
        radius,
        nodes,
        edges: edges.into_iter().map(|id| Value::Edge(id).to_json(graph)).collect(),
        truncated,
    })
}
