//! The query fixture world and a direct answer for each fixture program.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::PathBuf;

use brain_core::eval::{FixedScore, PluginRegistry, Value};
use brain_core::feedback::{record_feedback, FeedbackRecord, Target};
use brain_core::graph::{EdgeTypeRegistry, Graph, NodeHandle, PathRef, Verdict};
use brain_core::ingest::{parse_feed_file, SourceRegistry};

use crate::fixtures;
use crate::oracle::fold;

pub const PROGRAMS: [&str; 11] = [
    "objects_a_human_can_use",
    "paths_by_belief",
    "affordances_of_usable_objects",
    "independent_parameters",
    "joint_parameters",
    "anticipation_trajectories",
    "anticipation_parameters",
    "anticipation_joint_parameters",
    "squeezable",
    "planning_trajectories",
    "representation_choice",
];

/// Fixed scorer outputs for the grounding algorithms.
pub const SCORES: [(&str, f64); 2] = [("A", 0.6), ("B", 0.5)];

pub fn program_text(name: &str) -> String {
    fs::read_to_string(fixtures().join("rql/programs").join(format!("{name}.rql"))).unwrap()
}

pub fn plugins() -> PluginRegistry {
    let mut p = PluginRegistry::new();
    for (id, s) in SCORES {
        p.register(id, FixedScore(s));
    }
    p
}

pub fn world_files() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = fs::read_dir(fixtures().join("rql/world"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    files
}

/// The world feeds unioned in file order, then a fixed pattern of verdicts
/// so beliefs differ between elements.
pub fn world() -> Graph {
    let mut reg = SourceRegistry::load(fixtures().join("sources.toml")).unwrap();
    let mut g = Graph::new(EdgeTypeRegistry::default());
    for (i, f) in world_files().iter().enumerate() {
        let feed = parse_feed_file(f, g.edge_types(), &mut reg).unwrap();
        g.begin_record(i as u64 + 1);
        g.apply_feed_union(&feed.source, feed.trust, &feed.assertions).unwrap();
    }
    seed_feedback(&mut g);
    g
}

pub fn seed_feedback(g: &mut Graph) {
    let mut targets: Vec<Target> = g.edges().map(|e| Target::Edge(e.id.clone())).collect();
    targets.extend(g.nodes().map(|n| Target::Node(n.handle.clone())));
    for (k, target) in targets.into_iter().enumerate() {
        let votes: &[(&str, Verdict)] = match k % 5 {
            0 => &[("ann", Verdict::Approve), ("bo", Verdict::Approve)],
            1 => &[("ann", Verdict::Disapprove)],
            3 => &[("cy", Verdict::Approve)],
            _ => &[],
        };
        for (user, verdict) in votes {
            let rec = FeedbackRecord {
                target: target.clone(),
                verdict: *verdict,
                user: (*user).to_owned(),
                at: Default::default(),
                latest_wins: true,
            };
            record_feedback(g, &rec).unwrap();
        }
    }
}

struct World<'a> {
    g: &'a Graph,
}

impl World<'_> {
    fn named(&self, name: &str) -> Vec<NodeHandle> {
        self.g.nodes().filter(|n| fold(&n.name) == fold(name)).map(|n| n.handle.clone()).collect()
    }

    fn succ(&self, h: &NodeHandle, label: &str) -> BTreeSet<NodeHandle> {
        self.g
            .edges()
            .filter(|e| &e.src == h && e.edge_type == label)
            .map(|e| e.dst.clone())
            .collect()
    }

    fn pred(&self, h: &NodeHandle, label: &str) -> BTreeSet<NodeHandle> {
        self.g
            .edges()
            .filter(|e| &e.dst == h && e.edge_type == label)
            .map(|e| e.src.clone())
            .collect()
    }

    /// Targets of `label` edges out of every node named `name`.
    fn out_of_named(&self, name: &str, label: &str) -> BTreeSet<NodeHandle> {
        self.named(name).iter().flat_map(|h| self.succ(h, label)).collect()
    }

    fn name(&self, h: &NodeHandle) -> &str {
        &self.g.node(h).unwrap().name
    }

    fn src(&self, h: &NodeHandle) -> &str {
        &self.g.node(h).unwrap().src
    }

    fn parameters(&self, activity: &str, src: Option<&str>) -> BTreeSet<NodeHandle> {
        self.out_of_named(activity, "HasParameters")
            .into_iter()
            .filter(|v| src.is_none_or(|s| self.src(v) == s))
            .collect()
    }

    fn independent(&self, activity: &str, src: Option<&str>) -> Vec<NodeHandle> {
        self.parameters(activity, src)
            .into_iter()
            .filter(|u| self.pred(u, "HasParameters").len() == 1)
            .collect()
    }

    fn joint(&self, a1: &str, a2: &str, src: Option<&str>) -> Vec<NodeHandle> {
        let second = self.parameters(a2, src);
        self.parameters(a1, src)
            .into_iter()
            .filter(|u| self.pred(u, "HasParameters").len() == 2 && second.contains(u))
            .collect()
    }

    fn belief(&self, p: &PathRef) -> f64 {
        let mut b: f64 = p.edges.iter().map(|e| self.g.edge(e).unwrap().belief.value()).product();
        for h in &p.nodes[1..p.nodes.len() - 1] {
            b *= self.g.node(h).unwrap().belief.value();
        }
        b
    }

    fn simple_paths(&self, from: &str, to: &str, max_len: usize) -> Vec<PathRef> {
        let goal: BTreeSet<NodeHandle> = self.named(to).into_iter().collect();
        let mut out = Vec::new();
        let mut stack: Vec<PathRef> = self
            .named(from)
            .into_iter()
            .map(|h| PathRef {
                nodes: vec![h],
                edges: vec![],
            })
            .collect();
        while let Some(p) = stack.pop() {
            if !p.edges.is_empty() && goal.contains(p.nodes.last().unwrap()) {
                out.push(p.clone());
            }
            if p.edges.len() == max_len {
                continue;
            }
            for e in self.g.edges().filter(|e| &e.src == p.nodes.last().unwrap()) {
                if p.nodes.contains(&e.dst) {
                    continue;
                }
                let mut q = p.clone();
                q.nodes.push(e.dst.clone());
                q.edges.push(e.id.clone());
                stack.push(q);
            }
        }
        out
    }
}

fn nodes_of(v: &Value) -> Result<Vec<NodeHandle>, String> {
    match v {
        Value::List(xs) => xs
            .iter()
            .map(|x| match x {
                Value::Node(h) => Ok(h.clone()),
                other => Err(format!("expected a node, got {other:?}")),
            })
            .collect(),
        other => Err(format!("expected a list of nodes, got {other:?}")),
    }
}

fn groups_of(v: &Value) -> Result<Vec<Vec<NodeHandle>>, String> {
    match v {
        Value::List(xs) => xs.iter().map(nodes_of).collect(),
        other => Err(format!("expected a list of lists, got {other:?}")),
    }
}

fn same<T: PartialEq + std::fmt::Debug>(what: &str, got: T, want: T) -> Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("{what}: got {got:?}, want {want:?}"))
    }
}

/// Compares an evaluated program against a direct computation on `g`.
/// `max_path_len` bounds variable-length paths.
pub fn check(program: &str, g: &Graph, value: &Value, max_path_len: usize) -> Result<(), String> {
    let w = World { g };
    let sorted = |s: BTreeSet<NodeHandle>| s.into_iter().collect::<Vec<_>>();
    match program {
        "objects_a_human_can_use" => same(program, nodes_of(value)?, sorted(w.out_of_named("Human", "CanUse"))),
        "affordances_of_usable_objects" => {
            let want: Vec<Vec<NodeHandle>> = w
                .out_of_named("Human", "CanUse")
                .iter()
                .map(|o| sorted(w.out_of_named(w.name(o), "HasAffordance")))
                .collect();
            same(program, groups_of(value)?, want)
        }
        "independent_parameters" => same(program, nodes_of(value)?, w.independent("reaching", None)),
        "joint_parameters" => same(program, nodes_of(value)?, w.joint("reaching", "placing", None)),
        "anticipation_parameters" => same(program, nodes_of(value)?, w.independent("drinking", Some("Activity"))),
        "anticipation_joint_parameters" => {
            same(program, nodes_of(value)?, w.joint("drinking", "pouring", Some("Activity")))
        }
        "anticipation_trajectories" => {
            let want: Vec<Vec<NodeHandle>> = w
                .out_of_named("cup", "HasAffordance")
                .into_iter()
                .filter(|a| w.src(a) == "Affordance")
                .map(|a| {
                    w.succ(&a, "HasParameters")
                        .into_iter()
                        .filter(|v| w.src(v) == "Affordance" && g.node(v).unwrap().node_type == "Trajectory")
                        .collect()
                })
                .collect();
            same(program, groups_of(value)?, want)
        }
        "planning_trajectories" => {
            let want: Vec<Vec<NodeHandle>> = w
                .out_of_named("egg", "HasAttribute")
                .iter()
                .map(|a| sorted(w.succ(a, "HasTrajectory")))
                .collect();
            same(program, groups_of(value)?, want)
        }
        "squeezable" => {
            let want = w
                .out_of_named("syrup", "HasAffordance")
                .iter()
                .any(|v| fold(w.name(v)) == "squeezable");
            same(program, value, &Value::Bool(want))
        }
        "paths_by_belief" => {
            let Value::List(xs) = value else {
                return Err(format!("{program}: expected a list, got {value:?}"));
            };
            let got: Vec<PathRef> = xs
                .iter()
                .map(|x| match x {
                    Value::Path(p) => Ok(p.clone()),
                    other => Err(format!("{program}: expected paths, got {other:?}")),
                })
                .collect::<Result<_, _>>()?;
            let mut want: Vec<(f64, PathRef)> = w
                .simple_paths("Human", "Cup", max_path_len)
                .into_iter()
                .map(|p| (w.belief(&p), p))
                .collect();
            want.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
            want.dedup_by(|a, b| a.1 == b.1);
            same(program, got, want.into_iter().map(|(_, p)| p).collect())
        }
        "representation_choice" => {
            let scores: BTreeMap<&str, f64> = SCORES.into_iter().collect();
            let mut best: Option<(f64, NodeHandle)> = None;
            for u in g.nodes().filter(|n| n.node_type == "GroundingAlgorithm") {
                let priors = w.out_of_named(&u.name, "HasPriorProb");
                let prior = match priors.len() {
                    0 => 1.0,
                    1 => w.name(priors.iter().next().unwrap()).parse::<f64>().unwrap(),
                    n => return Err(format!("{}: {n} priors", u.name)),
                };
                for _ in w.succ(&u.handle, "HasParameters") {
                    let s = scores[u.name.as_str()] * prior;
                    let better = match &best {
                        None => true,
                        Some((bs, bh)) => s > *bs || (s == *bs && u.handle < *bh),
                    };
                    if better {
                        best = Some((s, u.handle.clone()));
                    }
                }
            }
            let (score, handle) = best.ok_or("no grounding algorithms")?;
            match value {
                Value::Tuple(parts) => match parts.as_slice() {
                    [Value::Node(h), Value::Num(s)] => {
                        same(program, h, &handle)?;
                        if (s - score).abs() <= 1e-12 {
                            Ok(())
                        } else {
                            Err(format!("{program}: score {s}, want {score}"))
                        }
                    }
                    _ => Err(format!("{program}: expected (node, score), got {value:?}")),
                },
                other => Err(format!("{program}: expected a tuple, got {other:?}")),
            }
        }
        other => Err(format!("unknown program {other}")),
    }
}
