use std::collections::BTreeSet;

use brain_core::config::BrainConfig;
use brain_core::exec::Execution;
use brain_core::store::{rebuild_excluding, scan_log, DataDir, RecordBody};
use brain_testkit::gen;

use super::ensure;

const LOGS: u64 = 100;
const MAX_RECORDS: u64 = 50;

pub fn run() -> super::Outcome {
    let mut config = BrainConfig::default();
    config.store.fsync = false;
    config.store.snapshot_every = 16;
    let (mut kinds, mut total, mut removed) = ([0usize; 3], 0u64, 0usize);
    for i in 0..LOGS {
        let (tmp, mut engine) = gen::workload(0x5eed_0004 ^ i, MAX_RECORDS, &config);
        let live = engine.view();
        ensure(live.seq <= MAX_RECORDS, || format!("log {i} has {} records", live.seq))?;
        total += live.seq;
        ensure(engine.rebuild().map_err(|e| e.to_string())?, || format!("log {i}: rebuild differs from live"))?;
        let rebuilt = engine.view();
        ensure(rebuilt.graph.canonical_json() == live.graph.canonical_json(), || {
            format!("log {i}: rebuilt serialization differs")
        })?;

        let records = scan_log(&std::fs::read(DataDir::new(tmp.path()).log()).unwrap()).records;
        for r in &records {
            kinds[match r.body {
                RecordBody::Feed(_) => 0,
                RecordBody::Feedback(_) => 1,
                RecordBody::GraphOp { .. } => 2,
            }] += 1;
        }
        for s in gen::SOURCES {
            let (g, _) = rebuild_excluding(
                &config.edge_types(),
                &records,
                &BTreeSet::from([s.to_owned()]),
                Execution::default(),
            );
            ensure(g.nodes().all(|n| n.src != s) && g.edges().all(|e| e.source != s), || {
                format!("log {i}: content from {s} survived its exclusion")
            })?;
            removed += live.graph.nodes().filter(|n| n.src == s).count();
        }
    }
    Ok(format!(
        "{LOGS} logs, {total} records ({} feeds, {} verdicts, {} graph ops): rebuilds byte-identical, \
         exclusion removed {removed} source nodes",
        kinds[0], kinds[1], kinds[2]
    ))
}
