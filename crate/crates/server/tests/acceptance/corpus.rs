use std::collections::BTreeMap;

use brain_core::eval::{evaluate, EvalOptions};
use brain_core::rql::parse;
use brain_testkit::corpus;

pub fn run() -> super::Outcome {
    let g = corpus::world();
    let plugins = corpus::plugins();
    let opts = EvalOptions::default();
    for name in corpus::PROGRAMS {
        let program = parse(&corpus::program_text(name)).map_err(|e| format!("{name}: {e}"))?;
        let out = evaluate(&program, &g, &BTreeMap::new(), &plugins, opts).map_err(|e| format!("{name}: {e}"))?;
        corpus::check(name, &g, &out.value, opts.max_path_len)?;
    }
    Ok(format!("{} programs agree with direct answers", corpus::PROGRAMS.len()))
}
