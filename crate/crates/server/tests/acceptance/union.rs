use brain_core::graph::{Assertion, EdgeTypeRegistry, Graph};
use brain_testkit::gen;
use brain_testkit::oracle::SetModel;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ensure;

const TRIALS: usize = 100;
const FEEDS_PER_TRIAL: usize = 5;

fn apply(feeds: &[(&str, f64, Vec<Assertion>)]) -> Graph {
    let mut g = Graph::new(EdgeTypeRegistry::default());
    for (i, (src, trust, a)) in feeds.iter().enumerate() {
        g.begin_record(i as u64 + 1);
        g.apply_feed_union(src, *trust, a).expect("generated feeds are valid");
    }
    g
}

pub fn run() -> super::Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut applications = 0;
    for trial in 0..TRIALS {
        let feeds: Vec<(&str, f64, Vec<Assertion>)> = (0..FEEDS_PER_TRIAL)
            .map(|_| {
                let src = gen::SOURCES[rng.random_range(0..gen::SOURCES.len())];
                (src, rng.random_range(0.0..=1.0), gen::assertions(&mut rng, 8))
            })
            .collect();
        let g = apply(&feeds);
        applications += feeds.len();

        let mut model = SetModel::default();
        for (src, _, a) in &feeds {
            model.union(src, a);
        }
        ensure(SetModel::of(&g) == model, || format!("trial {trial}: graph differs from the set union"))?;

        for (i, (src, trust, a)) in feeds.iter().enumerate() {
            let mut again = g.clone();
            again.begin_record(FEEDS_PER_TRIAL as u64 + 1);
            let delta = again.apply_feed_union(src, *trust, a).expect("valid");
            ensure(delta.is_empty() && again.canonical_json() == g.canonical_json(), || {
                format!("trial {trial}: re-applying feed {i} changed the graph")
            })?;
        }

        let mut shuffled = feeds.clone();
        shuffled.shuffle(&mut rng);
        applications += shuffled.len();
        ensure(SetModel::of(&apply(&shuffled)) == model, || {
            format!("trial {trial}: a different feed order gave a different graph")
        })?;
    }
    Ok(format!(
        "{applications} feed applications over {TRIALS} trials: union, idempotence and order independence hold"
    ))
}
