pub mod config;
pub mod engine;
pub mod eval;
pub mod exec;
pub mod feedback;
pub mod graph;
pub mod inference;
pub mod ingest;
pub mod rql;
pub mod store;
