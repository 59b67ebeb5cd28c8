//! Seeded random feeds, templates and engine workloads.

use brain_core::config::BrainConfig;
use brain_core::engine::{Engine, EngineError};
use brain_core::exec::Execution;
use brain_core::store::DataDir;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;
use brain_core::feedback::{EditAction, GraphEditProposal};
use brain_core::graph::{Assertion, EdgeId, EndpointDescriptor, NodeConstraint, Template, TemplateStep, Verdict};
use rand::seq::IndexedRandom;
use rand::Rng;

pub const SOURCES: [&str; 3] = ["s0", "s1", "s2"];
pub const NAMES: [&str; 8] = ["cup", "mug", "bowl", "hand", "pour", "grasp", "red", "glass"];
pub const TYPES: [&str; 2] = ["Concept", "Object"];
pub const LABELS: [&str; 4] = ["IsTypeOf", "HasAffordance", "CanUse", "HasAttribute"];

pub fn endpoint(rng: &mut impl Rng) -> EndpointDescriptor {
    EndpointDescriptor::new(*NAMES.choose(rng).unwrap(), *TYPES.choose(rng).unwrap())
}

/// `1..=max` assertions over the small name pool, never a self-loop.
pub fn assertions(rng: &mut impl Rng, max: usize) -> Vec<Assertion> {
    let n = rng.random_range(1..=max);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let (s, d) = (endpoint(rng), endpoint(rng));
        if s.name == d.name && s.node_type == d.node_type {
            continue;
        }
        out.push(Assertion::new(s, *LABELS.choose(rng).unwrap(), d));
    }
    out
}

/// Feed text in the wire format.
pub fn feed_text(source: &str, assertions: &[Assertion]) -> String {
    let mut s = serde_json::json!({
        "source": source,
        "source_version": "1",
        "back_pointer": "generated",
    })
    .to_string();
    for a in assertions {
        s.push('\n');
        s.push_str(&serde_json::to_string(a).unwrap());
    }
    s.push('\n');
    s
}

fn constraint(rng: &mut impl Rng, var: Option<&str>) -> NodeConstraint {
    let mut c = NodeConstraint {
        var: var.map(str::to_owned),
        ..Default::default()
    };
    match rng.random_range(0..8) {
        0 => c.name = Some((*NAMES.choose(rng).unwrap()).to_uppercase()),
        1 => c.node_type = Some((*TYPES.choose(rng).unwrap()).to_owned()),
        2 => c.src = Some((*SOURCES.choose(rng).unwrap()).to_owned()),
        _ => {}
    }
    c
}

/// A template of 0..=3 steps. Variables are drawn from a pool of three so
/// repeats (joins) happen.
pub fn template(rng: &mut impl Rng) -> Template {
    const VARS: [&str; 3] = ["a", "b", "c"];
    fn var(rng: &mut impl Rng) -> Option<&'static str> {
        rng.random_bool(0.5).then(|| *VARS.choose(rng).unwrap())
    }
    let v = var(rng);
    let mut t = Template::single(constraint(rng, v));
    for i in 0..rng.random_range(0..=3) {
        let step = match rng.random_range(0..3) {
            0 => TemplateStep::Labeled((*LABELS.choose(rng).unwrap()).to_owned()),
            1 => TemplateStep::Edge(format!("e{}", rng.random_range(0..2))),
            _ => TemplateStep::Star(format!("r{i}")),
        };
        let v = var(rng);
        let node = constraint(rng, v);
        t = t.then(step, node);
    }
    t
}

/// Drives `engine` with a seeded mix of feeds, verdicts and graph edits
/// until its log holds about `records` records (never more).
pub fn drive(engine: &mut Engine, rng: &mut impl Rng, records: u64) -> Result<(), EngineError> {
    for s in SOURCES {
        if engine.sources().get(s).is_none() {
            engine.register_source(s, (rng.random_range(0..=10) as f64) / 10.0, "generated")?;
        }
    }
    const USERS: [&str; 3] = ["ann", "bo", "cy"];
    let mut last_feed: Option<String> = None;
    let mut stalls = 0;
    while engine.view().seq < records && stalls < 50 {
        let before = engine.view().seq;
        let room = records - before;
        let g = engine.view();
        let nodes = g.graph.handles();
        let edges: Vec<EdgeId> = g.graph.edges().map(|e| e.id.clone()).collect();
        let user = *USERS.choose(rng).unwrap();
        match rng.random_range(0..100) {
            // a feed of k assertions touches at most 2k nodes, each of which
            // can be split once and merged once, plus the feed record itself
            0..45 if room >= 7 => {
                let k = ((room - 1) / 6).min(5) as usize;
                let text = match (&last_feed, rng.random_bool(0.1)) {
                    (Some(t), true) if t.lines().count() <= k + 1 => t.clone(),
                    _ => feed_text(SOURCES.choose(rng).unwrap(), &assertions(rng, k)),
                };
                engine.ingest_text(&text)?;
                last_feed = Some(text);
            }
            45..70 if !nodes.is_empty() || !edges.is_empty() => {
                let target = if edges.is_empty() || (!nodes.is_empty() && rng.random_bool(0.5)) {
                    nodes.choose(rng).unwrap().to_string()
                } else {
                    edges.choose(rng).unwrap().to_string()
                };
                let verdict = if rng.random_bool(0.6) { Verdict::Approve } else { Verdict::Disapprove };
                engine.feedback(&target, verdict, user)?;
            }
            70..78 => {
                let action = EditAction::AddNode {
                    name: (*NAMES.choose(rng).unwrap()).to_owned(),
                    node_type: (*TYPES.choose(rng).unwrap()).to_owned(),
                    media_ref: None,
                };
                engine.edit(GraphEditProposal::new(action, user))?;
            }
            78..88 if nodes.len() >= 2 => {
                let action = EditAction::AddEdge {
                    src: nodes.choose(rng).unwrap().clone(),
                    dst: nodes.choose(rng).unwrap().clone(),
                    edge_type: (*LABELS.choose(rng).unwrap()).to_owned(),
                };
                engine.edit(GraphEditProposal::new(action, user))?;
            }
            88..93 if !edges.is_empty() => {
                let action = EditAction::DeleteEdge {
                    id: edges.choose(rng).unwrap().clone(),
                };
                engine.edit(GraphEditProposal::new(action, user))?;
            }
            93..96 if !nodes.is_empty() => {
                let action = EditAction::DeleteNode {
                    handle: nodes.choose(rng).unwrap().clone(),
                };
                engine.edit(GraphEditProposal::new(action, user))?;
            }
            96..100 if nodes.len() >= 2 => {
                let action = EditAction::Merge {
                    a: nodes.choose(rng).unwrap().clone(),
                    b: nodes.choose(rng).unwrap().clone(),
                };
                engine.edit(GraphEditProposal::new(action, user))?;
            }
            _ => {}
        }
        if engine.view().seq == before {
            stalls += 1;
        } else {
            stalls = 0;
        }
    }
    Ok(())
}

/// An engine in a fresh temporary directory whose log holds at most `max`
/// records from a seeded workload. Seeds whose inference cascades past the
/// cap are retried with the next derived seed.
pub fn workload(seed: u64, max: u64, config: &BrainConfig) -> (TempDir, Engine) {
    for attempt in 0u64.. {
        let tmp = tempfile::tempdir().expect("temp dir");
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt.wrapping_mul(0x9e37_79b9_7f4a_7c15)));
        let mut engine =
            Engine::open_with(DataDir::new(tmp.path()), config.clone(), Execution::Sequential).expect("open engine");
        drive(&mut engine, &mut rng, max.saturating_sub(6)).expect("workload applies");
        if engine.view().seq <= max {
            return (tmp, engine);
        }
    }
    unreachable!()
}
