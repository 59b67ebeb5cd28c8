use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Graph;
use crate::exec::Execution;

/// Degree distribution summary; degree counts both directions.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DegreeStats {
    pub node_count: usize,
    pub edge_count: usize,
    pub avg_degree: f64,
    pub histogram: BTreeMap<usize, usize>,
}

impl DegreeStats {
    /// Number of nodes with exactly `degree` incident edges.
    pub fn count_with_degree(&self, degree: usize) -> usize {
        self.histogram.get(&degree).copied().unwrap_or(0)
    }

    /// Average degree implied by raw counts: `2|E| / |V|`, or 0 for no nodes.
    pub fn average_for(node_count: usize, edge_count: usize) -> f64 {
        if node_count == 0 {
            0.0
        } else {
            2.0 * edge_count as f64 / node_count as f64
        }
    }
}

impl Graph {
    pub fn degree_stats(&self) -> DegreeStats {
        self.degree_stats_with(Execution::default())
    }

    pub fn degree_stats_with(&self, exec: Execution) -> DegreeStats {
        let handles = self.handles();
        let degrees = exec.map(&handles, |h| self.degree(h));
        let mut histogram = BTreeMap::new();
        for d in degrees {
            *histogram.entry(d).or_insert(0) += 1;
        }
        DegreeStats {
            node_count: self.node_count(),
            edge_count: self.edge_count(),
            avg_degree: DegreeStats::average_for(self.node_count(), self.edge_count()),
            histogram,
        }
    }
}
