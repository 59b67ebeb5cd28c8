//! Crowd feedback: approve/disapprove verdicts and proposed graph edits.

use std::collections::BTreeMap;
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{BeliefState, EdgeId, Graph, GraphError, GraphOp, NodeDescriptor, NodeHandle, Side, Verdict};

/// Source id given to nodes and edges that users add by hand.
pub const CROWD_SOURCE: &str = "crowd";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Node(NodeHandle),
    Edge(EdgeId),
}

impl Target {
    /// Resolves a bare id against the live graph: node handles first, then edge ids.
    pub fn resolve(graph: &Graph, id: &str) -> Option<Target> {
        let h = NodeHandle::new(id);
        if graph.contains_node(&h) {
            return Some(Target::Node(h));
        }
        let e = EdgeId::new(id);
        graph.edge(&e).map(|_| Target::Edge(e))
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Node(h) => write!(f, "{h}"),
            Target::Edge(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackRecord {
    pub target: Target,
    pub verdict: Verdict,
    pub user: String,
    pub at: DateTime<Utc>,
    /// Whether a repeat verdict from the same user replaces the earlier one.
    #[serde(default = "yes")]
    pub latest_wins: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeedbackError {
    #[error("no live node or edge {0}")]
    NotFound(String),
    #[error("user must be nonempty")]
    NoUser,
}

fn belief_mut<'g>(graph: &'g mut Graph, target: &Target) -> Option<&'g mut BeliefState> {
    match target {
        Target::Node(h) => graph.node_belief_mut(h),
        Target::Edge(e) => graph.edge_belief_mut(e),
    }
}

/// Applies a verdict and returns the new belief.
pub fn record_feedback(graph: &mut Graph, rec: &FeedbackRecord) -> Result<f64, FeedbackError> {
    if rec.user.trim().is_empty() {
        return Err(FeedbackError::NoUser);
    }
    let belief = belief_mut(graph, &rec.target).ok_or_else(|| FeedbackError::NotFound(rec.target.to_string()))?;
    belief.record(&rec.user, rec.verdict, rec.latest_wins);
    Ok(belief.value())
}

pub fn belief_of(graph: &Graph, target: &Target) -> Result<f64, FeedbackError> {
    let b = match target {
        Target::Node(h) => graph.node(h).map(|n| &n.belief),
        Target::Edge(e) => graph.edge(e).map(|e| &e.belief),
    };
    b.map(BeliefState::value)
        .ok_or_else(|| FeedbackError::NotFound(target.to_string()))
}

/// A user-proposed structural change.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum EditAction {
    AddNode {
        name: String,
        #[serde(rename = "type")]
        node_type: String,
        #[serde(default)]
        media_ref: Option<String>,
    },
    AddEdge {
        src: NodeHandle,
        dst: NodeHandle,
        edge_type: String,
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

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EditStatus {
    Pending,
    Applied,
    Rejected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEditProposal {
    #[serde(flatten)]
    pub action: EditAction,
    pub proposer: String,
    #[serde(default = "pending")]
    pub status: EditStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

fn pending() -> EditStatus {
    EditStatus::Pending
}

impl GraphEditProposal {
    pub fn new(action: EditAction, proposer: impl Into<String>) -> Self {
        Self {
            action,
            proposer: proposer.into(),
            status: EditStatus::Pending,
            reason: None,
        }
    }

    /// The graph operation this edit stands for. `crowd_trust` seeds the
    /// belief of anything added.
    pub fn to_op(&self, crowd_trust: f64) -> GraphOp {
        match &self.action {
            EditAction::AddNode {
                name,
                node_type,
                media_ref,
            } => GraphOp::AddNode {
                node: NodeDescriptor {
                    media_ref: media_ref.clone(),
                    ..NodeDescriptor::new(name.trim(), node_type.trim(), CROWD_SOURCE)
                },
                trust: crowd_trust,
            },
            EditAction::AddEdge { src, dst, edge_type } => GraphOp::AddEdge {
                src: src.clone(),
                dst: dst.clone(),
                edge_type: edge_type.split_whitespace().collect(),
                source: CROWD_SOURCE.to_owned(),
                trust: crowd_trust,
            },
            EditAction::DeleteNode { handle } => GraphOp::DeleteNode { handle: handle.clone() },
            EditAction::DeleteEdge { id } => GraphOp::DeleteEdge { id: id.clone() },
            EditAction::Split { node, assignment } => GraphOp::Split {
                node: node.clone(),
                assignment: assignment.clone(),
            },
            EditAction::Merge { a, b } => GraphOp::Merge {
                a: a.clone(),
                b: b.clone(),
            },
        }
    }

    /// Applies the edit to `graph`, setting the status. On rejection the
    /// graph is unchanged and `None` is returned.
    pub fn apply(&mut self, graph: &mut Graph, crowd_trust: f64) -> Option<GraphOp> {
        let op = self.to_op(crowd_trust);
        match graph.apply_op(&op) {
            Ok(_) => {
                self.status = EditStatus::Applied;
                self.reason = None;
                Some(op)
            }
            Err(e) => {
                self.reject(&e);
                None
            }
        }
    }

    pub fn reject(&mut self, e: &GraphError) {
        self.status = EditStatus::Rejected;
        self.reason = Some(e.to_string());
    }
}
