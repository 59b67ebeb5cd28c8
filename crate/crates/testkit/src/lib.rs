//! Reference implementations and generators shared by the test suites.
//!
//! Everything under [`oracle`] is written against raw node and edge lists,
//! without the engine's indexes or matcher, so the two can be compared.

pub mod corpus;
pub mod gen;
pub mod oracle;

use std::path::PathBuf;

/// The repository's `fixtures/` directory.
pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}
