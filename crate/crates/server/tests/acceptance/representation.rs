use std::collections::BTreeMap;

use brain_core::eval::{evaluate, EvalOptions, FixedScore, PluginRegistry, Value};
use brain_core::graph::{Assertion, EdgeTypeRegistry, EndpointDescriptor, Graph, NodeHandle};
use brain_core::rql::parse;
use brain_testkit::corpus;

use super::ensure;

/// (algorithm, scorer output, prior)
type Case = (&'static str, &'static [(&'static str, f64, f64)]);

const CASES: [Case; 3] = [
    ("score decides", &[("A", 0.9, 0.4), ("B", 0.3, 0.8), ("C", 0.2, 0.9)]),
    ("prior decides", &[("A", 0.6, 0.5), ("B", 0.5, 0.7), ("C", 0.55, 0.1)]),
    ("tie", &[("B", 0.25, 1.0), ("A", 0.5, 0.5), ("C", 0.125, 1.0)]),
];

const SCALES: [f64; 6] = [1.0, 0.5, 2.0, 1e-3, 3.7, 1e3];

fn graph(algs: &[(&str, f64, f64)], scale: f64) -> Graph {
    let ep = |n: &str, t: &str| EndpointDescriptor::new(n, t);
    let mut assertions = Vec::new();
    for (name, _, prior) in algs {
        let alg = ep(name, "GroundingAlgorithm");
        assertions.push(Assertion::new(alg.clone(), "HasParameters", ep(&format!("{name} weights"), "Parameters")));
        assertions.push(Assertion::new(alg, "HasPriorProb", ep(&(prior * scale).to_string(), "Prior")));
    }
    let mut g = Graph::new(EdgeTypeRegistry::default());
    g.begin_record(1);
    g.apply_feed_union("grounding", 0.7, &assertions).unwrap();
    g
}

/// The algorithm with the largest score times prior; ties go to the
/// smallest handle.
fn expected(g: &Graph, algs: &[(&str, f64, f64)], scale: f64) -> (NodeHandle, f64) {
    let mut best: Option<(f64, NodeHandle)> = None;
    for (name, score, prior) in algs {
        let h = g.nodes_named(name)[0].clone();
        let v = score * (prior * scale);
        if best.as_ref().is_none_or(|(bv, bh)| v > *bv || (v == *bv && h < *bh)) {
            best = Some((v, h));
        }
    }
    let (v, h) = best.unwrap();
    (h, v)
}

pub fn run() -> super::Outcome {
    let program = parse(&corpus::program_text("representation_choice")).map_err(|e| e.to_string())?;
    let mut winners = Vec::new();
    for (label, algs) in CASES {
        let mut plugins = PluginRegistry::new();
        for (name, score, _) in algs {
            plugins.register(*name, FixedScore(*score));
        }
        let mut first: Option<String> = None;
        for scale in SCALES {
            let g = graph(algs, scale);
            let out = evaluate(&program, &g, &BTreeMap::new(), &plugins, EvalOptions::default())
                .map_err(|e| format!("{label}: {e}"))?;
            let (want_h, want_v) = expected(&g, algs, scale);
            let Value::Tuple(parts) = &out.value else {
                return Err(format!("{label}: result {:?}", out.value));
            };
            let [Value::Node(h), Value::Num(v)] = parts.as_slice() else {
                return Err(format!("{label}: result {:?}", out.value));
            };
            ensure(*h == want_h && (v - want_v).abs() <= 1e-12 * want_v.abs().max(1.0), || {
                format!("{label} at scale {scale}: chose {h} ({v}), want {want_h} ({want_v})")
            })?;
            let chosen = g.node(h).unwrap().name.clone();
            match &first {
                None => first = Some(chosen),
                Some(f) => ensure(*f == chosen, || format!("{label}: scale {scale} changed the choice to {chosen}"))?,
            }
        }
        winners.push(format!("{label} -> {}", first.unwrap()));
    }
    Ok(format!("{}; unchanged under {} prior scales", winners.join(", "), SCALES.len()))
}
