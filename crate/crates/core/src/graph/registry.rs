use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

/// Relation labels seeded into every new registry.
pub const DEFAULT_EDGE_TYPES: &[&str] = &[
    "IsTypeOf",
    "HasAppearance",
    "CanPerformAction",
    "SpatiallyDistributedAs",
    "IsHolonym",
    "UsesFeature",
    "CanUse",
    "HasAffordance",
    "HasParameters",
    "HasTrajectory",
    "HasAttribute",
    "HasPriorProb",
];

/// The set of relation labels an edge may carry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeTypeRegistry {
    entries: BTreeSet<String>,
}

impl Default for EdgeTypeRegistry {
    fn default() -> Self {
        Self {
            entries: DEFAULT_EDGE_TYPES.iter().map(|s| s.to_string()).collect(),
        }
    }
}

impl EdgeTypeRegistry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeSet::new(),
        }
    }

    pub fn register(&mut self, edge_type: impl Into<String>) -> bool {
        self.entries.insert(edge_type.into())
    }

    pub fn contains(&self, edge_type: &str) -> bool {
        self.entries.contains(edge_type)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(String::as_str)
    }

    /// Labels in `types` that are not registered, sorted and deduplicated.
    pub fn unknown<'a>(&self, types: impl IntoIterator<Item = &'a str>) -> Vec<String> {
        types
            .into_iter()
            .filter(|t| !self.contains(t))
            .map(str::to_owned)
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_with_relation_vocabulary() {
        let r = EdgeTypeRegistry::default();
        for t in ["IsTypeOf", "CanUse", "HasParameters", "HasPriorProb"] {
            assert!(r.contains(t));
        }
        assert!(!r.contains("Frobnicates"));
        assert_eq!(r.unknown(["CanUse", "Zap", "Frob", "Zap"]), ["Frob", "Zap"]);
    }
}
