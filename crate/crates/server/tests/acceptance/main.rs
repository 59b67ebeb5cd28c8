//! One line per acceptance criterion: `PASS` or `FAIL`, the measured
//! figures, and the wall time. Exits non-zero if any criterion fails.

mod belief;
mod corpus;
mod cupmug;
mod degree;
mod fuzz;
mod rebuild;
mod representation;
mod union;

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

struct Criterion {
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

const CRITERIA: [Criterion; 8] = [
    Criterion {
        name: "rql-corpus",
        limit: Some(Duration::from_secs(5)),
        run: corpus::run,
    },
    Criterion {
        name: "feed-union",
        limit: Some(Duration::from_secs(30)),
        run: union::run,
    },
    Criterion {
        name: "cup-mug-end-to-end",
        limit: None,
        run: cupmug::run,
    },
    Criterion {
        name: "log-rebuild",
        limit: Some(Duration::from_secs(60)),
        run: rebuild::run,
    },
    Criterion {
        name: "belief-rule",
        limit: None,
        run: belief::run,
    },
    Criterion {
        name: "cross-project-degree",
        limit: None,
        run: degree::run,
    },
    Criterion {
        name: "representation-choice",
        limit: None,
        run: representation::run,
    },
    Criterion {
        name: "parser-fuzz",
        limit: None,
        run: fuzz::run,
    },
];

fn main() -> ExitCode {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for c in CRITERIA.iter().filter(|c| filter.is_empty() || filter.iter().any(|f| c.name.contains(f.as_str()))) {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let took = start.elapsed();
        let outcome = match (outcome, c.limit) {
            (Ok(d), Some(limit)) if took > limit => Err(format!("{d}; took {took:.2?}, limit {limit:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("PASS {}: {detail} ({took:.2?})", c.name),
            Err(why) => {
                failed += 1;
                println!("FAIL {}: {why} ({took:.2?})", c.name);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

/// `Err(msg)` unless `cond`.
fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}
