//! The single writer over a data directory.
//!
//! Every mutation runs against a private copy of the current graph, is
//! appended to the log, and only then becomes visible to readers as a new
//! immutable [`GraphView`].

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use chrono::Utc;
use serde::Serialize;
use thiserror::Error;

use crate::config::BrainConfig;
use crate::exec::Execution;
use crate::feedback::{FeedbackError, FeedbackRecord, GraphEditProposal, Target, CROWD_SOURCE};
use crate::graph::{Graph, GraphError, OpOutcome, Verdict};
use crate::inference::{propose_updates, resolve, GraphOpProposal};
use crate::ingest::{parse_feed_text, Feed, IngestError, SourceRegistry};
use crate::store::{
    apply_record, latest_snapshot, rebuild, replay, scan_log, write_snapshot, Applied, DataDir, KBRecord, Log, OpOrigin,
    Quarantine, RecordBody, ReplayError, Snapshot, StoreError,
};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Feedback(#[from] FeedbackError),
    #[error("config: {0}")]
    Config(String),
}

impl From<ReplayError> for EngineError {
    fn from(e: ReplayError) -> Self {
        match e {
            ReplayError::Graph(g) => EngineError::Graph(g),
            ReplayError::Feedback(f) => EngineError::Feedback(f),
        }
    }
}

pub type Result<T> = std::result::Result<T, EngineError>;

/// An immutable published graph state.
#[derive(Debug, Clone)]
pub struct GraphView {
    /// Seq of the last record reflected in `graph`.
    pub seq: u64,
    pub graph: Graph,
}

/// Cheap handle for readers; never blocks on the writer.
#[derive(Debug, Clone)]
pub struct Reader(Arc<RwLock<Arc<GraphView>>>);

impl Reader {
    pub fn current(&self) -> Arc<GraphView> {
        self.0.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    fn publish(&self, view: GraphView) {
        *self.0.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(view);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IngestReport {
    pub feed_id: String,
    pub seq: u64,
    pub nodes_added: usize,
    pub edges_added: usize,
    pub splits_applied: usize,
    pub merges_applied: usize,
    pub proposals: Vec<GraphOpProposal>,
    /// The feed id was already in the log; nothing was appended.
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    pub duplicate: bool,
}

#[derive(Debug)]
pub struct Engine {
    dir: DataDir,
    config: BrainConfig,
    exec: Execution,
    log: Log,
    sources: SourceRegistry,
    reader: Reader,
    feed_ids: BTreeMap<String, u64>,
    quarantine: Option<Quarantine>,
    last_snapshot: u64,
}

impl Engine {
    /// Opens `dir`, reading `brain.toml` from it if present.
    pub fn open(dir: DataDir) -> Result<Engine> {
        let config = BrainConfig::load(dir.config()).map_err(EngineError::Config)?;
        Self::open_with(dir, config, Execution::default())
    }

    pub fn open_with(dir: DataDir, config: BrainConfig, exec: Execution) -> Result<Engine> {
        dir.create()?;
        let sources = SourceRegistry::load(dir.sources())?;
        let (log, records, quarantine) = Log::open(dir.log(), config.store.fsync)?;
        let base = latest_snapshot(dir.snapshots(), log.last_seq());
        let (graph, from, last_snapshot) = match base {
            Some(s) => (s.graph, s.up_to_seq as usize, s.up_to_seq),
            None => (Graph::new(config.edge_types()), 0, 0),
        };
        let graph = replay(graph, &records[from..], exec)?;
        let feed_ids = records
            .iter()
            .filter_map(|r| match &r.body {
                RecordBody::Feed(f) => Some((f.feed_id.clone(), r.seq)),
                _ => None,
            })
            .collect();
        let reader = Reader(Arc::new(RwLock::new(Arc::new(GraphView {
            seq: log.last_seq(),
            graph,
        }))));
        Ok(Engine {
            dir,
            config,
            exec,
            log,
            sources,
            reader,
            feed_ids,
            quarantine,
            last_snapshot,
        })
    }

    pub fn reader(&self) -> Reader {
        self.reader.clone()
    }

    pub fn view(&self) -> Arc<GraphView> {
        self.reader.current()
    }

    pub fn config(&self) -> &BrainConfig {
        &self.config
    }

    pub fn data_dir(&self) -> &DataDir {
        &self.dir
    }

    pub fn sources(&self) -> &SourceRegistry {
        &self.sources
    }

    pub fn exec(&self) -> Execution {
        self.exec
    }

    /// The tail cut off while opening the log, if any.
    pub fn quarantine(&self) -> Option<&Quarantine> {
        self.quarantine.as_ref()
    }

    pub fn register_source(&mut self, id: &str, trust: f64, description: &str) -> Result<()> {
        let mut next = self.sources.clone();
        next.register(id, trust, description)?;
        next.save(self.dir.sources())?;
        self.sources = next;
        Ok(())
    }

    fn source_trust(&mut self, id: &str) -> Result<f64> {
        if let Some(t) = self.sources.trust(id) {
            return Ok(t);
        }
        let t = self.sources.trust_or_register(id);
        self.sources.save(self.dir.sources())?;
        Ok(t)
    }

    /// Parses and ingests feed text.
    pub fn ingest_text(&mut self, text: &str) -> Result<IngestReport> {
        let raw = parse_feed_text(text, self.view().graph.edge_types())?;
        let known = self.sources.get(&raw.source).is_some();
        let feed = raw.stamp(&mut self.sources, Utc::now());
        if !known {
            self.sources.save(self.dir.sources())?;
        }
        self.ingest(feed)
    }

    /// Unions a feed into the graph, then applies the split and merge
    /// proposals it triggers. Each applied proposal is its own log record.
    pub fn ingest(&mut self, feed: Feed) -> Result<IngestReport> {
        if let Some(&seq) = self.feed_ids.get(&feed.feed_id) {
            return Ok(IngestReport {
                feed_id: feed.feed_id,
                seq,
                nodes_added: 0,
                edges_added: 0,
                splits_applied: 0,
                merges_applied: 0,
                proposals: Vec::new(),
                duplicate: true,
            });
        }
        let mut graph = self.view().graph.clone();
        let seq = self.log.next_seq();
        let feed_id = feed.feed_id.clone();
        let head = KBRecord::new(seq, RecordBody::Feed(feed));
        let Applied::Feed(delta) = apply_record(&mut graph, &head, self.exec)? else {
            unreachable!("feed records produce a delta")
        };
        let proposals = propose_updates(&graph, &delta, &self.config.inference, self.exec);

        let mut records = vec![head];
        let mut outcomes = Vec::with_capacity(proposals.len());
        let (mut splits, mut merges) = (0, 0);
        for p in &proposals {
            let next = seq + records.len() as u64;
            let op = match resolve(p, &outcomes) {
                Ok(op) => op,
                Err(e) => {
                    tracing::warn!(error = %e, "dropping unresolvable proposal");
                    break;
                }
            };
            let rec = KBRecord::new(
                next,
                RecordBody::GraphOp {
                    op,
                    origin: OpOrigin::Inference {
                        feed_id: feed_id.clone(),
                    },
                },
            );
            match apply_record(&mut graph, &rec, self.exec) {
                Ok(Applied::Op(outcome)) => {
                    match outcome {
                        OpOutcome::Split { .. } => splits += 1,
                        OpOutcome::Merged { .. } => merges += 1,
                        _ => {}
                    }
                    outcomes.push(outcome);
                    records.push(rec);
                }
                Ok(_) => unreachable!("op records produce an outcome"),
                Err(e) => {
                    tracing::warn!(error = %e, "dropping inapplicable proposal");
                    break;
                }
            }
        }
        self.commit(records, graph)?;
        self.feed_ids.insert(feed_id.clone(), seq);
        Ok(IngestReport {
            feed_id,
            seq,
            nodes_added: delta.added_nodes.len(),
            edges_added: delta.added_edges.len(),
            splits_applied: splits,
            merges_applied: merges,
            proposals,
            duplicate: false,
        })
    }

    /// Records an approve/disapprove verdict on a node handle or edge id.
    pub fn feedback(&mut self, target: &str, verdict: Verdict, user: &str) -> Result<f64> {
        let view = self.view();
        let target = Target::resolve(&view.graph, target).ok_or_else(|| FeedbackError::NotFound(target.to_owned()))?;
        let rec = KBRecord::new(
            self.log.next_seq(),
            RecordBody::Feedback(FeedbackRecord {
                target,
                verdict,
                user: user.to_owned(),
                at: Utc::now(),
                latest_wins: self.config.feedback.latest_verdict_wins,
            }),
        );
        let mut graph = view.graph.clone();
        let Applied::Feedback(belief) = apply_record(&mut graph, &rec, self.exec)? else {
            unreachable!("feedback records produce a belief")
        };
        self.commit(vec![rec], graph)?;
        Ok(belief)
    }

    /// Applies a user graph edit. Invalid edits come back rejected with a
    /// reason; only storage failures are errors.
    pub fn edit(&mut self, mut proposal: GraphEditProposal) -> Result<GraphEditProposal> {
        let trust = self.source_trust(CROWD_SOURCE)?;
        let op = proposal.to_op(trust);
        let rec = KBRecord::new(
            self.log.next_seq(),
            RecordBody::GraphOp {
                op,
                origin: OpOrigin::User {
                    proposer: proposal.proposer.clone(),
                },
            },
        );
        let mut graph = self.view().graph.clone();
        match apply_record(&mut graph, &rec, self.exec) {
            Ok(_) => {
                self.commit(vec![rec], graph)?;
                proposal.status = crate::feedback::EditStatus::Applied;
            }
            Err(ReplayError::Graph(e)) => proposal.reject(&e),
            Err(e) => return Err(e.into()),
        }
        Ok(proposal)
    }

    fn commit(&mut self, records: Vec<KBRecord>, graph: Graph) -> Result<()> {
        self.log.append(&records)?;
        let seq = self.log.last_seq();
        let every = self.config.store.snapshot_every;
        let snapshot_due = every > 0 && seq - self.last_snapshot >= every;
        if snapshot_due {
            if let Err(e) = write_snapshot(self.dir.snapshots(), &Snapshot::new(seq, graph.clone())) {
                tracing::warn!(error = %e, "snapshot failed");
            } else {
                self.last_snapshot = seq;
            }
        }
        self.reader.publish(GraphView { seq, graph });
        Ok(())
    }

    /// Replays the whole log from an empty graph and republishes the result.
    /// Returns whether it matched the graph that was live before.
    pub fn rebuild(&mut self) -> Result<bool> {
        let path = self.dir.log();
        let bytes = std::fs::read(&path).map_err(|source| StoreError::Io { path, source })?;
        let scan = scan_log(&bytes);
        let graph = rebuild(&self.config.edge_types(), &scan.records, self.exec)?;
        let before = self.view();
        let same = before.graph.canonical_json() == graph.canonical_json();
        self.reader.publish(GraphView {
            seq: scan.records.len() as u64,
            graph,
        });
        Ok(same)
    }

    pub fn snapshot(&mut self) -> Result<PathBuf> {
        let view = self.view();
        let path = write_snapshot(self.dir.snapshots(), &Snapshot::new(view.seq, view.graph.clone()))?;
        self.last_snapshot = view.seq;
        Ok(path)
    }
}
