//! `brain.toml`.
//!
//! ```toml
//! [inference]
//! tau_merge = 0.6
//! tau_split = 0.2
//! max_path_len = 6
//!
//! [feedback]
//! latest_verdict_wins = true
//!
//! [store]
//! fsync = true
//! snapshot_every = 1000
//!
//! [graph]
//! extra_edge_types = ["IsPartOf"]
//!
//! # stub scorers, keyed by node handle or name
//! [plugins]
//! A = 0.6
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::eval::{FixedScore, PluginRegistry};
use crate::graph::EdgeTypeRegistry;
use crate::inference::InferenceConfig;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BrainConfig {
    pub inference: InferenceConfig,
    pub feedback: FeedbackConfig,
    pub store: StoreConfig,
    pub graph: GraphConfig,
    pub plugins: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeedbackConfig {
    pub latest_verdict_wins: bool,
}

impl Default for FeedbackConfig {
    fn default() -> Self {
        Self {
            latest_verdict_wins: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct StoreConfig {
    pub fsync: bool,
    /// Write a snapshot after this many records; 0 disables.
    pub snapshot_every: u64,
}

impl Default for StoreConfig {
    fn default() -> Self {
        Self {
            fsync: true,
            snapshot_every: 1000,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct GraphConfig {
    pub extra_edge_types: Vec<String>,
}

impl BrainConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        let cfg: BrainConfig = toml::from_str(text).map_err(|e| e.to_string())?;
        let i = &cfg.inference;
        if !(0.0..=1.0).contains(&i.tau_merge) || !(0.0..=1.0).contains(&i.tau_split) {
            return Err("inference thresholds must lie in [0, 1]".into());
        }
        if let Some((id, _)) = cfg.plugins.iter().find(|(_, s)| !(0.0..=1.0).contains(*s)) {
            return Err(format!("plugin score for {id:?} must lie in [0, 1]"));
        }
        if i.max_path_len == 0 {
            return Err("inference.max_path_len must be positive".into());
        }
        Ok(cfg)
    }

    /// Loads `path`, falling back to defaults when it does not exist.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, String> {
        let path = path.as_ref();
        match fs::read_to_string(path) {
            Ok(text) => Self::from_toml(&text).map_err(|e| format!("{}: {e}", path.display())),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Self::default()),
            Err(e) => Err(format!("{}: {e}", path.display())),
        }
    }

    pub fn plugin_registry(&self) -> PluginRegistry {
        let mut r = PluginRegistry::new();
        for (id, score) in &self.plugins {
            r.register(id.as_str(), FixedScore(*score));
        }
        r
    }

    pub fn edge_types(&self) -> EdgeTypeRegistry {
        let mut r = EdgeTypeRegistry::default();
        for t in &self.graph.extra_edge_types {
            r.register(t.as_str());
        }
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let d = BrainConfig::from_toml("").unwrap();
        assert_eq!(d.inference.tau_merge, 0.6);
        assert_eq!(d.inference.tau_split, 0.2);
        assert!(d.feedback.latest_verdict_wins);
        let c = BrainConfig::from_toml("[inference]\ntau_merge = 0.8\n[graph]\nextra_edge_types = [\"IsPartOf\"]\n").unwrap();
        assert_eq!(c.inference.tau_merge, 0.8);
        assert_eq!(c.inference.tau_split, 0.2);
        assert!(c.edge_types().contains("IsPartOf"));
        assert!(BrainConfig::from_toml("[inference]\ntau_merge = 3\n").is_err());
        assert!(BrainConfig::from_toml("[nope]\n").is_err());
        let p = BrainConfig::from_toml("[plugins]\nA = 0.6\n").unwrap();
        assert!(p.plugin_registry().get("A").is_some());
        assert!(BrainConfig::from_toml("[plugins]\nA = 1.6\n").is_err());
    }
}
