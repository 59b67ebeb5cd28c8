use std::collections::BTreeSet;
use std::path::Path;

use brain_core::config::BrainConfig;
use brain_core::engine::Engine;
use brain_core::exec::Execution;
use brain_core::store::{rebuild, rebuild_excluding, replay, scan_log, DataDir, KBRecord};
use brain_testkit::gen;
use proptest::prelude::*;

fn config(snapshot_every: u64) -> BrainConfig {
    let mut c = BrainConfig::default();
    c.store.fsync = false;
    c.store.snapshot_every = snapshot_every;
    c
}

fn records(dir: &Path) -> Vec<KBRecord> {
    let scan = scan_log(&std::fs::read(DataDir::new(dir).log()).unwrap());
    assert!(scan.corruption.is_none());
    scan.records
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reopen_and_rebuild_reproduce_the_live_graph(seed in any::<u64>(), every in 0u64..12) {
        let (tmp, e) = gen::workload(seed, 50, &config(every));
        let live = e.view();
        prop_assert!(live.seq <= 50);
        drop(e);

        let mut again = Engine::open_with(DataDir::new(tmp.path()), config(every), Execution::Parallel).unwrap();
        prop_assert_eq!(again.view().graph.canonical_json(), live.graph.canonical_json());
        prop_assert!(again.rebuild().unwrap());

        let recs = records(tmp.path());
        let full = rebuild(&live.graph.edge_types().clone(), &recs, Execution::Sequential).unwrap();
        prop_assert_eq!(full.canonical_json(), live.graph.canonical_json());
    }

    #[test]
    fn snapshot_plus_suffix_equals_full_replay(seed in any::<u64>(), cut in 0.0f64..=1.0) {
        let (tmp, e) = gen::workload(seed, 40, &config(0));
        let types = e.config().edge_types();
        let recs = records(tmp.path());
        let k = (cut * recs.len() as f64) as usize;
        let prefix = rebuild(&types, &recs[..k], Execution::Sequential).unwrap();
        let joined = replay(prefix, &recs[k..], Execution::Sequential).unwrap();
        let full = rebuild(&types, &recs, Execution::Sequential).unwrap();
        prop_assert_eq!(joined.canonical_json(), full.canonical_json());
    }

    #[test]
    fn excluding_a_source_removes_all_its_content(seed in any::<u64>(), which in 0usize..3) {
        let (tmp, e) = gen::workload(seed, 50, &config(0));
        let s = gen::SOURCES[which];
        let (g, report) = rebuild_excluding(
            &e.config().edge_types(),
            &records(tmp.path()),
            &BTreeSet::from([s.to_owned()]),
            Execution::Sequential,
        );
        prop_assert!(g.nodes().all(|n| n.src != s));
        prop_assert!(g.edges().all(|x| x.source != s));
        let live = e.view();
        if live.graph.nodes().any(|n| n.src == s) {
            prop_assert!(!report.excluded.is_empty());
        }
        let (again, _) = rebuild_excluding(
            &e.config().edge_types(),
            &records(tmp.path()),
            &BTreeSet::from([s.to_owned()]),
            Execution::Parallel,
        );
        prop_assert_eq!(again.canonical_json(), g.canonical_json());
    }
}
