use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use super::Value;

/// A learned model stored in the graph as a node. Applying the node to
/// `(command, environment, params)` yields a likelihood in `[0, 1]`.
pub trait ScorerPlugin: Send + Sync {
    fn score(&self, command: &Value, environment: &Value, params: &Value) -> f64;
}

impl<F> ScorerPlugin for F
where
    F: Fn(&Value, &Value, &Value) -> f64 + Send + Sync,
{
    fn score(&self, command: &Value, environment: &Value, params: &Value) -> f64 {
        self(command, environment, params)
    }
}

/// Returns the same score for every input.
#[derive(Debug, Clone, Copy)]
pub struct FixedScore(pub f64);

impl ScorerPlugin for FixedScore {
    fn score(&self, _: &Value, _: &Value, _: &Value) -> f64 {
        self.0
    }
}

/// Plugins keyed by id. A node is dispatched by its handle, then its name.
#[derive(Clone, Default)]
pub struct PluginRegistry {
    plugins: BTreeMap<String, Arc<dyn ScorerPlugin>>,
}

impl PluginRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, id: impl Into<String>, plugin: impl ScorerPlugin + 'static) -> &mut Self {
        self.plugins.insert(id.into(), Arc::new(plugin));
        self
    }

    pub fn get(&self, id: &str) -> Option<&Arc<dyn ScorerPlugin>> {
        self.plugins.get(id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.plugins.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.plugins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plugins.is_empty()
    }
}

impl fmt::Debug for PluginRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.plugins.keys()).finish()
    }
}
