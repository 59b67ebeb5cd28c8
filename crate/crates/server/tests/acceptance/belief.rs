use brain_core::graph::{BeliefState, Verdict};
use brain_testkit::oracle::{belief, tally};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ensure;

const TOL: f64 = 1e-12;
const SEQUENCES: usize = 1000;

fn close(what: &str, got: f64, want: f64) -> Result<(), String> {
    ensure((got - want).abs() <= TOL, || format!("{what}: {got} != {want}"))
}

pub fn run() -> super::Outcome {
    close("trust 0.5", BeliefState::from_trust(0.5).value(), 0.5)?;
    close("trust 0.9", BeliefState::from_trust(0.9).value(), 0.766_666_666_666_666_7)?;
    let mut b = BeliefState::with_prior(3.0, 3.0);
    for u in ["a", "b", "c"] {
        b.record(u, Verdict::Approve, true);
    }
    b.record("d", Verdict::Disapprove, true);
    close("3 approve / 1 disapprove at (3,3)", b.value(), 0.6)?;

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let mut steps = 0;
    for s in 0..SEQUENCES {
        let trust = rng.random_range(0.0..=1.0);
        let latest = rng.random_bool(0.8);
        let mut b = BeliefState::from_trust(trust);
        let mut votes: Vec<(String, Verdict)> = Vec::new();
        for _ in 0..rng.random_range(1..40) {
            let user = format!("u{}", rng.random_range(0..6));
            let v = if rng.random_bool(0.5) { Verdict::Approve } else { Verdict::Disapprove };
            let before = (b.value(), tally(&votes, latest));
            votes.push((user.clone(), v));
            b.record(&user, v, latest);
            let (a, d) = tally(&votes, latest);
            close(&format!("sequence {s}"), b.value(), belief(trust, a, d))?;
            let (prev, (pa, pd)) = before;
            let moved = if (a, d) == (pa, pd) {
                b.value() == prev
            } else if v == Verdict::Approve {
                b.value() > prev
            } else {
                b.value() < prev
            };
            ensure(moved, || format!("sequence {s}: {v:?} by {user} moved belief {prev} -> {}", b.value()))?;
            steps += 1;
        }
    }
    Ok(format!("analytic values within {TOL:e}; monotone over {SEQUENCES} sequences ({steps} verdicts)"))
}
