//! Operator CLI. Exit status: 0 success, 1 bad input, 2 internal failure.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;

use brain_core::engine::{Engine, EngineError};
use brain_core::eval::{evaluate, EvalOptions};
use brain_core::ingest::IngestError;
use brain_core::rql::parse;
use brain_core::store::{rebuild_excluding, scan_log, DataDir};
use brain_server::{router, AppState};
use clap::{Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(name = "brain", version, about = "Knowledge engine operator CLI")]
struct Cli {
    /// Data directory; defaults to $BRAIN_DATA_DIR, then ./brain-data.
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Serve the HTTP API and curator UI.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Directory of static UI files served at `/`.
        #[arg(long)]
        ui_dir: Option<PathBuf>,
    },
    /// Ingest one or more JSON Lines feed files.
    Ingest {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Evaluate an RQL program against the current graph.
    Query {
        program: Option<String>,
        /// Read the program from a file.
        #[arg(short, long, conflicts_with = "program")]
        file: Option<PathBuf>,
    },
    /// Replay the log from scratch and write a snapshot.
    Rebuild {
        /// Rebuild without these sources and report what that removes.
        /// Nothing is written.
        #[arg(long)]
        exclude: Vec<String>,
    },
    /// Degree statistics of the current graph.
    Stats,
    /// Register or re-rate a source.
    RegisterSource {
        id: String,
        trust: f64,
        #[arg(long, default_value = "")]
        description: String,
    },
}

enum Fail {
    User(String),
    Internal(String),
}

impl From<EngineError> for Fail {
    fn from(e: EngineError) -> Self {
        let user = match &e {
            EngineError::Ingest(i) => i.is_user_error(),
            EngineError::Graph(_) | EngineError::Feedback(_) | EngineError::Config(_) => true,
            EngineError::Store(_) => false,
        };
        if user {
            Fail::User(e.to_string())
        } else {
            Fail::Internal(e.to_string())
        }
    }
}

fn open(dir: &DataDir) -> Result<Engine, Fail> {
    let engine = Engine::open(dir.clone())?;
    if let Some(q) = engine.quarantine() {
        eprintln!(
            "warning: log damaged at byte {} ({}); {} bytes moved to {}",
            q.offset,
            q.reason,
            q.bytes,
            q.path.display()
        );
    }
    Ok(engine)
}

fn print(v: serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(&v).expect("json values serialize"));
}

fn run(cli: Cli) -> Result<(), Fail> {
    let dir = DataDir::resolve(cli.data_dir);
    match cli.cmd {
        Cmd::Serve { port, host, ui_dir } => {
            let addr: SocketAddr = format!("{host}:{port}")
                .parse()
                .map_err(|e| Fail::User(format!("bad address {host}:{port}: {e}")))?;
            let app = router(AppState::new(open(&dir)?), ui_dir);
            let rt = tokio::runtime::Runtime::new().map_err(|e| Fail::Internal(e.to_string()))?;
            rt.block_on(async {
                let listener = tokio::net::TcpListener::bind(addr)
                    .await
                    .map_err(|e| Fail::User(format!("cannot bind {addr}: {e}")))?;
                tracing::info!(%addr, data_dir = %dir.root().display(), "serving");
                axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await
                    .map_err(|e| Fail::Internal(e.to_string()))
            })
        }
        Cmd::Ingest { files } => {
            let mut engine = open(&dir)?;
            for path in files {
                let text = fs::read_to_string(&path).map_err(|source| {
                    Fail::User(IngestError::Io { path: path.clone(), source }.to_string())
                })?;
                let report = engine
                    .ingest_text(&text)
                    .map_err(|e| prefix(&path, Fail::from(e)))?;
                print(json!({ "file": path, "report": report }));
            }
            Ok(())
        }
        Cmd::Query { program, file } => {
            let src = match (program, file) {
                (Some(p), None) => p,
                (None, Some(f)) => fs::read_to_string(&f).map_err(|e| Fail::User(format!("{}: {e}", f.display())))?,
                _ => return Err(Fail::User("give a program or --file".into())),
            };
            let program = parse(&src).map_err(|e| Fail::User(e.to_string()))?;
            let engine = open(&dir)?;
            let view = engine.view();
            let opts = EvalOptions {
                max_path_len: engine.config().inference.max_path_len,
                exec: engine.exec(),
                ..EvalOptions::default()
            };
            let plugins = engine.config().plugin_registry();
            let ev = evaluate(&program, &view.graph, &BTreeMap::new(), &plugins, opts)
                .map_err(|e| Fail::User(e.to_string()))?;
            for w in &ev.warnings {
                eprintln!("warning: {w}");
            }
            print(ev.value.to_json(&view.graph));
            Ok(())
        }
        Cmd::Rebuild { exclude } if exclude.is_empty() => {
            let mut engine = open(&dir)?;
            let matched = engine.rebuild()?;
            let snapshot = engine.snapshot()?;
            let view = engine.view();
            print(json!({
                "seq": view.seq,
                "matches_live": matched,
                "snapshot": snapshot,
                "node_count": view.graph.node_count(),
                "edge_count": view.graph.edge_count(),
            }));
            Ok(())
        }
        Cmd::Rebuild { exclude } => {
            let engine = open(&dir)?;
            let bytes = fs::read(dir.log()).map_err(|e| Fail::Internal(format!("{}: {e}", dir.log().display())))?;
            let records = scan_log(&bytes).records;
            let sources: BTreeSet<String> = exclude.into_iter().collect();
            let (graph, report) = rebuild_excluding(&engine.config().edge_types(), &records, &sources, engine.exec());
            let live = engine.view();
            print(json!({
                "excluded_sources": sources,
                "excluded_records": report.excluded,
                "skipped_records": report.skipped,
                "node_count": graph.node_count(),
                "edge_count": graph.edge_count(),
                "live_node_count": live.graph.node_count(),
                "live_edge_count": live.graph.edge_count(),
            }));
            Ok(())
        }
        Cmd::Stats => {
            let engine = open(&dir)?;
            let view = engine.view();
            let s = view.graph.degree_stats_with(engine.exec());
            print(json!({
                "seq": view.seq,
                "node_count": s.node_count,
                "edge_count": s.edge_count,
                "avg_degree": s.avg_degree,
                "histogram": s.histogram,
            }));
            Ok(())
        }
        Cmd::RegisterSource { id, trust, description } => {
            let mut engine = open(&dir)?;
            engine.register_source(&id, trust, &description)?;
            print(json!({ "source": id, "trust": trust }));
            Ok(())
        }
    }
}

fn prefix(path: &std::path::Path, f: Fail) -> Fail {
    match f {
        Fail::User(m) => Fail::User(format!("{}: {m}", path.display())),
        Fail::Internal(m) => Fail::Internal(format!("{}: {m}", path.display())),
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail::User(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Fail::Internal(m)) => {
            eprintln!("internal error: {m}");
            ExitCode::from(2)
        }
    }
}
