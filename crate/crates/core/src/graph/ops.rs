use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{EdgeId, Graph, NodeDescriptor, NodeHandle, Result, Side};

/// A structural graph operation with fully resolved arguments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum GraphOp {
    AddNode {
        node: NodeDescriptor,
        trust: f64,
    },
    AddEdge {
        src: NodeHandle,
        dst: NodeHandle,
        edge_type: String,
        source: String,
        trust: f64,
    },
    DeleteNode {
        handle: NodeHandle,
    },
    DeleteEdge {
        id: EdgeId,
    },
    Split {
        node: NodeHandle,
        assignment: BTreeMap<EdgeId, Side>,
    },
    Merge {
        a: NodeHandle,
        b: NodeHandle,
    },
}

impl GraphOp {
    pub fn name(&self) -> &'static str {
        match self {
            GraphOp::AddNode { .. } => "add_node",
            GraphOp::AddEdge { .. } => "add_edge",
            GraphOp::DeleteNode { .. } => "delete_node",
            GraphOp::DeleteEdge { .. } => "delete_edge",
            GraphOp::Split { .. } => "split",
            GraphOp::Merge { .. } => "merge",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OpOutcome {
    Node { handle: NodeHandle, created: bool },
    Edge { id: EdgeId, created: bool },
    Deleted { edges: Vec<EdgeId> },
    Split { successors: [NodeHandle; 2] },
    Merged { survivor: NodeHandle },
}

impl Graph {
    /// Applies one operation. Each operation validates before mutating, so a
    /// failed call leaves the graph unchanged.
    pub fn apply_op(&mut self, op: &GraphOp) -> Result<OpOutcome> {
        Ok(match op {
            GraphOp::AddNode { node, trust } => {
                let (handle, created) = self.add_node(node, *trust)?;
                OpOutcome::Node { handle, created }
            }
            GraphOp::AddEdge {
                src,
                dst,
                edge_type,
                source,
                trust,
            } => {
                let (id, created) = self.add_edge(src, dst, edge_type, source, *trust)?;
                OpOutcome::Edge { id, created }
            }
            GraphOp::DeleteNode { handle } => OpOutcome::Deleted {
                edges: self.delete_node(handle)?,
            },
            GraphOp::DeleteEdge { id } => {
                self.delete_edge(id)?;
                OpOutcome::Deleted {
                    edges: vec![id.clone()],
                }
            }
            GraphOp::Split { node, assignment } => {
                let (a, b) = self.split(node, assignment)?;
                OpOutcome::Split { successors: [a, b] }
            }
            GraphOp::Merge { a, b } => OpOutcome::Merged {
                survivor: self.merge(a, b)?,
            },
        })
    }
}
