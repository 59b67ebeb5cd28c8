use std::panic::{catch_unwind, AssertUnwindSafe};

use brain_core::rql::parse_bytes;
use brain_testkit::corpus;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const INPUTS: usize = 10_000;

const PIECES: &[&str] = &[
    "fetch", "(", ")", "{", "}", "[", "]", "→", "->", ":", ",", "λ", "\\", "map", "filter", "Len", "SortBy", "argMaxBy",
    "Belief", ":=", "=", ">", "<", "and", "in", "*", "u", "v", "name", "`x'", "'y'", "\"z\"", "0.5", "\n", "  ", "r *",
];

fn input(rng: &mut ChaCha8Rng, programs: &[String]) -> Vec<u8> {
    match rng.random_range(0..3) {
        0 => (0..rng.random_range(0..200)).map(|_| rng.random()).collect(),
        1 => (0..rng.random_range(0..60))
            .map(|_| *PIECES.choose(rng).unwrap())
            .collect::<String>()
            .into_bytes(),
        _ => {
            let mut b = programs.choose(rng).unwrap().clone().into_bytes();
            for _ in 0..rng.random_range(1..6) {
                if b.is_empty() {
                    break;
                }
                let i = rng.random_range(0..b.len());
                match rng.random_range(0..3) {
                    0 => b[i] = rng.random(),
                    1 => {
                        b.remove(i);
                    }
                    _ => b.truncate(i),
                }
            }
            b
        }
    }
}

pub fn run() -> super::Outcome {
    let programs: Vec<String> = corpus::PROGRAMS.iter().map(|p| corpus::program_text(p)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
    let (mut parsed, mut rejected) = (0, 0);
    for n in 0..INPUTS {
        let bytes = input(&mut rng, &programs);
        let result = catch_unwind(AssertUnwindSafe(|| parse_bytes(&bytes)))
            .map_err(|_| format!("input {n} crashed the parser: {:?}", String::from_utf8_lossy(&bytes)))?;
        match result {
            Ok(_) => parsed += 1,
            Err(e) => {
                if e.line == 0 || e.column == 0 || e.message.is_empty() {
                    return Err(format!("input {n}: unstructured error {e:?}"));
                }
                rejected += 1;
            }
        }
    }
    Ok(format!("{INPUTS} inputs, 0 crashes: {rejected} structured errors, {parsed} valid programs"))
}
