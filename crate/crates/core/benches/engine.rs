use brain_core::exec::Execution;
use brain_core::graph::{
    Assertion, EdgeTypeRegistry, EndpointDescriptor, Graph, NodeConstraint, Template, TemplateStep,
};
use brain_core::inference::refresh_features;
use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const LABELS: [&str; 4] = ["IsTypeOf", "HasAffordance", "CanUse", "HasAttribute"];
const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

/// Several sources asserting edges over a shared vocabulary; features are
/// left stale so refresh has work to do.
fn world(concepts: usize, edges: usize) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut g = Graph::new(EdgeTypeRegistry::default());
    let ep = |i: usize| EndpointDescriptor::new(format!("c{i}"), if i.is_multiple_of(3) { "Object" } else { "Concept" });
    for (seq, src) in ["a", "b", "c", "d"].iter().enumerate() {
        let batch: Vec<Assertion> = (0..edges / 4)
            .filter_map(|_| {
                let (s, d) = (rng.random_range(0..concepts), rng.random_range(0..concepts));
                (s != d).then(|| Assertion::new(ep(s), LABELS[rng.random_range(0..LABELS.len())], ep(d)))
            })
            .collect();
        g.begin_record(seq as u64 + 1);
        g.apply_feed_union(src, 0.7, &batch).unwrap();
    }
    g
}

fn bench(c: &mut Criterion) {
    let g = world(1500, 8000);
    let t = Template::single(NodeConstraint {
        var: Some("u".into()),
        node_type: Some("Object".into()),
        ..Default::default()
    })
    .then(TemplateStep::Labeled("IsTypeOf".into()), NodeConstraint::var("v"))
    .then(TemplateStep::Star("r".into()), NodeConstraint::default());

    let mut group = c.benchmark_group("match_template");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| g.match_template(&t, 3, exec).len())
        });
    }
    group.finish();

    let mut group = c.benchmark_group("refresh_features");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter_batched(|| g.clone(), |mut g| refresh_features(&mut g, exec), BatchSize::LargeInput)
        });
    }
    group.finish();

    let mut group = c.benchmark_group("degree_stats");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| g.degree_stats_with(exec).avg_degree)
        });
    }
    group.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = bench
}
criterion_main!(benches);
