use std::collections::BTreeSet;
use std::fs;

use brain_core::config::BrainConfig;
use brain_core::engine::Engine;
use brain_core::exec::Execution;
use brain_core::graph::{DegreeStats, EdgeTypeRegistry, Graph};
use brain_core::ingest::{parse_feed_file, SourceRegistry};
use brain_core::store::DataDir;
use brain_testkit::fixtures;
use brain_testkit::oracle::degree_histogram;

use super::ensure;

const FEEDS: [&str; 2] = ["planit.jsonl", "anticipation.jsonl"];
const MIN_SHARED: usize = 5;

fn describe(s: &DegreeStats) -> String {
    format!(
        "{} nodes, {} edges, avg {:.3}, degree-1 {}",
        s.node_count,
        s.edge_count,
        s.avg_degree,
        s.count_with_degree(1)
    )
}

pub fn run() -> super::Outcome {
    let dir = fixtures().join("projects");
    let mut reg = SourceRegistry::load(fixtures().join("sources.toml")).unwrap();
    let mut baseline = Graph::new(EdgeTypeRegistry::default());
    let mut concepts: Vec<BTreeSet<(String, String)>> = Vec::new();
    for (i, f) in FEEDS.iter().enumerate() {
        let feed = parse_feed_file(dir.join(f), baseline.edge_types(), &mut reg).map_err(|e| e.to_string())?;
        concepts.push(
            feed.assertions
                .iter()
                .flat_map(|a| [&a.src, &a.dst])
                .map(|d| (d.name.clone(), d.node_type.clone()))
                .collect(),
        );
        baseline.begin_record(i as u64 + 1);
        baseline.apply_feed_union(&feed.source, feed.trust, &feed.assertions).map_err(|e| e.to_string())?;
    }
    let shared = concepts[0].intersection(&concepts[1]).count();
    ensure(shared >= MIN_SHARED, || format!("feeds share only {shared} concepts"))?;

    let tmp = tempfile::tempdir().unwrap();
    fs::copy(fixtures().join("sources.toml"), tmp.path().join("sources.toml")).unwrap();
    let mut engine = Engine::open_with(DataDir::new(tmp.path()), BrainConfig::default(), Execution::default())
        .map_err(|e| e.to_string())?;
    for f in FEEDS {
        engine.ingest_text(&fs::read_to_string(dir.join(f)).unwrap()).map_err(|e| e.to_string())?;
    }
    let merged = engine.view().graph.degree_stats();
    let base = baseline.degree_stats();
    ensure(base.histogram == degree_histogram(&baseline), || "baseline histogram disagrees with recount".into())?;
    ensure(merged.histogram == degree_histogram(&engine.view().graph), || {
        "merged histogram disagrees with recount".into()
    })?;
    ensure(merged.avg_degree > base.avg_degree, || {
        format!("average degree did not rise: baseline {}; merged {}", describe(&base), describe(&merged))
    })?;
    ensure(merged.count_with_degree(1) <= base.count_with_degree(1), || {
        format!("more degree-1 nodes: baseline {}; merged {}", describe(&base), describe(&merged))
    })?;
    Ok(format!(
        "{shared} shared concepts; baseline {}; merged {}",
        describe(&base),
        describe(&merged)
    ))
}
