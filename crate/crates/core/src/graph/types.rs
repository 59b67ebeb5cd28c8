use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Splits an engine-minted identifier `p{seq}_{index}` into its numeric parts.
fn minted_parts(s: &str) -> Option<(&str, u64, u64)> {
    let digits_at = s.find(|c: char| c.is_ascii_digit())?;
    let (prefix, rest) = s.split_at(digits_at);
    let (seq, idx) = rest.split_once('_')?;
    Some((prefix, seq.parse().ok()?, idx.parse().ok()?))
}

/// Canonical order for minted identifiers: numeric on (seq, index) so that
/// `n2_0` sorts before `n10_0`; anything else falls back to byte order.
fn canonical_cmp(a: &str, b: &str) -> Ordering {
    match (minted_parts(a), minted_parts(b)) {
        (Some(x), Some(y)) => x.cmp(&y).then_with(|| a.cmp(b)),
        (Some(_), None) => Ordering::Less,
        (None, Some(_)) => Ordering::Greater,
        (None, None) => a.cmp(b),
    }
}

macro_rules! minted_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(String);

        impl $name {
            pub fn new(value: impl Into<String>) -> Self {
                Self(value.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl Ord for $name {
            fn cmp(&self, other: &Self) -> Ordering {
                canonical_cmp(&self.0, &other.0)
            }
        }

        impl PartialOrd for $name {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }
    };
}

minted_id!(
    /// Opaque, engine-minted node identifier. Never reused once retired.
    NodeHandle
);
minted_id!(
    /// Opaque, engine-minted edge identifier.
    EdgeId
);

/// A coarse crowd verdict on a node or edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Approve,
    Disapprove,
}

/// Beta-Bernoulli belief over the accuracy of a node or edge.
///
/// The prior is shaped by the trust of the asserting source:
/// `alpha = 1 + k * trust`, `beta = 1 + k * (1 - trust)` with `k = 4`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefState {
    pub approvals: u64,
    pub disapprovals: u64,
    pub prior_alpha: f64,
    pub prior_beta: f64,
    /// Latest verdict per user, used to count each user once per target.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub votes: BTreeMap<String, Verdict>,
}

impl BeliefState {
    /// Pseudo-count mass the source trust contributes to the prior.
    pub const TRUST_WEIGHT: f64 = 4.0;

    pub fn from_trust(trust: f64) -> Self {
        let trust = trust.clamp(0.0, 1.0);
        Self::with_prior(
            1.0 + Self::TRUST_WEIGHT * trust,
            1.0 + Self::TRUST_WEIGHT * (1.0 - trust),
        )
    }

    pub fn with_prior(prior_alpha: f64, prior_beta: f64) -> Self {
        assert!(
            prior_alpha > 0.0 && prior_beta > 0.0,
            "belief priors must be positive"
        );
        Self {
            approvals: 0,
            disapprovals: 0,
            prior_alpha,
            prior_beta,
            votes: BTreeMap::new(),
        }
    }

    /// Posterior mean; always strictly inside (0, 1).
    pub fn value(&self) -> f64 {
        let a = self.prior_alpha + self.approvals as f64;
        let b = self.prior_beta + self.disapprovals as f64;
        a / (a + b)
    }

    /// Records a verdict. When `latest_wins` is set, a user's earlier verdict
    /// on this target is replaced rather than counted again.
    pub fn record(&mut self, user: &str, verdict: Verdict, latest_wins: bool) {
        if latest_wins {
            match self.votes.insert(user.to_owned(), verdict) {
                Some(prev) if prev == verdict => return,
                Some(prev) => self.uncount(prev),
                None => {}
            }
        }
        match verdict {
            Verdict::Approve => self.approvals += 1,
            Verdict::Disapprove => self.disapprovals += 1,
        }
    }

    fn uncount(&mut self, verdict: Verdict) {
        match verdict {
            Verdict::Approve => self.approvals = self.approvals.saturating_sub(1),
            Verdict::Disapprove => self.disapprovals = self.disapprovals.saturating_sub(1),
        }
    }

    /// Folds another belief into this one (merge): counts add, our votes win.
    pub fn absorb(&mut self, other: &BeliefState) {
        self.approvals += other.approvals;
        self.disapprovals += other.disapprovals;
        for (user, verdict) in &other.votes {
            self.votes.entry(user.clone()).or_insert(*verdict);
        }
    }
}

/// Direction of an incident edge relative to the node it is viewed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    In,
    Out,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::In => "in",
            Direction::Out => "out",
        })
    }
}

/// One dimension of a connectivity feature vector.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FeatureKey {
    pub edge_type: String,
    pub direction: Direction,
    pub token: String,
}

/// Sparse, L2-normalized connectivity features of a node.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<(FeatureKey, f64)>", into = "Vec<(FeatureKey, f64)>")]
pub struct FeatureVector {
    entries: BTreeMap<FeatureKey, f64>,
}

impl From<Vec<(FeatureKey, f64)>> for FeatureVector {
    fn from(v: Vec<(FeatureKey, f64)>) -> Self {
        Self {
            entries: v.into_iter().collect(),
        }
    }
}

impl From<FeatureVector> for Vec<(FeatureKey, f64)> {
    fn from(v: FeatureVector) -> Self {
        v.entries.into_iter().collect()
    }
}

impl FeatureVector {
    /// Builds a normalized vector from raw counts; all-zero input yields the zero vector.
    pub fn from_counts(counts: BTreeMap<FeatureKey, f64>) -> Self {
        let norm = counts.values().map(|w| w * w).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Self::default();
        }
        Self {
            entries: counts
                .into_iter()
                .filter(|(_, w)| *w != 0.0)
                .map(|(k, w)| (k, w / norm))
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &FeatureKey) -> f64 {
        self.entries.get(key).copied().unwrap_or(0.0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&FeatureKey, f64)> {
        self.entries.iter().map(|(k, w)| (k, *w))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.entries.values().map(|w| w * w).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &FeatureVector) -> f64 {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .entries
            .iter()
            .map(|(k, w)| w * large.get(k))
            .sum()
    }
}

/// What a feed assertion says about one endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndpointDescriptor {
    pub name: String,
    #[serde(rename = "type")]
    pub node_type: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub media_ref: Option<String>,
    /// Free-form source metadata; kept with the feed, not on the node.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub properties: BTreeMap<String, serde_json::Value>,
}

impl EndpointDescriptor {
    pub fn new(name: impl Into<String>, node_type: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            node_type: node_type.into(),
            media_ref: None,
            properties: BTreeMap::new(),
        }
    }
}

/// One edge assertion `(src, dst, edge_type)` of a feed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assertion {
    pub src: EndpointDescriptor,
    #[serde(rename = "edge")]
    pub edge_type: String,
    pub dst: EndpointDescriptor,
}

impl Assertion {
    pub fn new(src: EndpointDescriptor, edge_type: impl Into<String>, dst: EndpointDescriptor) -> Self {
        Self {
            src,
            edge_type: edge_type.into(),
            dst,
        }
    }
}

/// Full node descriptor; `(name, node_type, src)` is the union identity key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeDescriptor {
    pub name: String,
    pub node_type: String,
    pub src: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub media_ref: Option<String>,
}

impl NodeDescriptor {
    pub fn new(name: impl Into<String>, node_type: impl Into<String>, src: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            node_type: node_type.into(),
            src: src.into(),
            media_ref: None,
        }
    }

    pub fn from_endpoint(d: &EndpointDescriptor, src: &str) -> Self {
        Self {
            name: d.name.clone(),
            node_type: d.node_type.clone(),
            src: src.to_owned(),
            media_ref: d.media_ref.clone(),
        }
    }

    pub(crate) fn identity(&self) -> IdentityKey {
        (self.name.clone(), self.node_type.clone(), self.src.clone())
    }
}

pub(crate) type IdentityKey = (String, String, String);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineageKind {
    Split,
    Merge,
}

/// Provenance note linking a node to a handle it was derived from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lineage {
    pub kind: LineageKind,
    pub from: NodeHandle,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConceptNode {
    pub handle: NodeHandle,
    pub name: String,
    pub node_type: String,
    pub src: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub media_ref: Option<String>,
    pub belief: BeliefState,
    #[serde(default)]
    pub feature: FeatureVector,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lineage: Vec<Lineage>,
}

impl ConceptNode {
    pub(crate) fn identity(&self) -> IdentityKey {
        (self.name.clone(), self.node_type.clone(), self.src.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypedEdge {
    pub id: EdgeId,
    pub src: NodeHandle,
    pub dst: NodeHandle,
    pub edge_type: String,
    pub source: String,
    pub belief: BeliefState,
}

impl TypedEdge {
    /// The endpoint opposite `node`, with the direction seen from `node`.
    pub fn other_end(&self, node: &NodeHandle) -> Option<(&NodeHandle, Direction)> {
        if &self.src == node {
            Some((&self.dst, Direction::Out))
        } else if &self.dst == node {
            Some((&self.src, Direction::In))
        } else {
            None
        }
    }
}

/// Why a node left the live graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "reason")]
pub enum Retirement {
    Split { successors: [NodeHandle; 2] },
    Merged { into: NodeHandle },
    Deleted,
}

/// The genuinely new content produced by one feed union.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedDelta {
    pub added_nodes: Vec<NodeHandle>,
    pub added_edges: Vec<EdgeId>,
}

impl FeedDelta {
    pub fn is_empty(&self) -> bool {
        self.added_nodes.is_empty() && self.added_edges.is_empty()
    }
}

/// Which successor of a split an incident edge goes to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "0")]
    Zero,
    #[serde(rename = "1")]
    One,
}

impl Side {
    pub fn index(self) -> usize {
        match self {
            Side::Zero => 0,
            Side::One => 1,
        }
    }
}
