//! Append-only knowledge log and graph snapshots.
//!
//! `kb.log` is a sequence of records, each framed as
//!
//! ```text
//! {byte length} {crc32 as 8 hex digits}\n{json}\n
//! ```
//!
//! The graph is a derived view: replaying the log from an empty graph
//! reproduces it exactly, handles included.

use std::collections::BTreeSet;
use std::env;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::Execution;
use crate::feedback::{record_feedback, FeedbackError, FeedbackRecord};
use crate::graph::{EdgeTypeRegistry, FeedDelta, Graph, GraphError, GraphOp, OpOutcome};
use crate::inference::refresh_features;
use crate::ingest::Feed;

pub const SNAPSHOT_FORMAT_VERSION: u32 = 1;
pub const DATA_DIR_ENV: &str = "BRAIN_DATA_DIR";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("record {seq}: {source}")]
    Replay {
        seq: u64,
        #[source]
        source: ReplayError,
    },
    #[error("expected record seq {expected}, got {found}")]
    SeqOutOfOrder { expected: u64, found: u64 },
    #[error("snapshot {path}: {message}")]
    Snapshot { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Feedback(#[from] FeedbackError),
}

pub type Result<T> = std::result::Result<T, StoreError>;

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_owned(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "by", rename_all = "snake_case")]
pub enum OpOrigin {
    Inference { feed_id: String },
    User { proposer: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RecordBody {
    Feed(Feed),
    Feedback(FeedbackRecord),
    GraphOp { op: GraphOp, origin: OpOrigin },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KBRecord {
    pub seq: u64,
    pub recorded_at: DateTime<Utc>,
    pub body: RecordBody,
}

impl KBRecord {
    pub fn new(seq: u64, body: RecordBody) -> Self {
        Self {
            seq,
            recorded_at: Utc::now(),
            body,
        }
    }

    /// Framed bytes as written to the log.
    pub fn encode(&self) -> Vec<u8> {
        let json = serde_json::to_vec(self).expect("records always serialize");
        let mut out = format!("{} {:08x}\n", json.len(), crc32fast::hash(&json)).into_bytes();
        out.extend_from_slice(&json);
        out.push(b'\n');
        out
    }

    /// The source a record's content is attributed to, if any.
    pub fn source(&self) -> Option<&str> {
        match &self.body {
            RecordBody::Feed(f) => Some(&f.source),
            RecordBody::GraphOp {
                op: GraphOp::AddNode { node, .. },
                ..
            } => Some(&node.src),
            RecordBody::GraphOp {
                op: GraphOp::AddEdge { source, .. },
                ..
            } => Some(source),
            _ => None,
        }
    }
}

/// What applying one record did.
#[derive(Debug, Clone, PartialEq)]
pub enum Applied {
    Feed(FeedDelta),
    Feedback(f64),
    Op(OpOutcome),
}

/// Applies one record to `graph`. Live ingestion and replay both go through
/// here, so they cannot drift apart.
pub fn apply_record(graph: &mut Graph, rec: &KBRecord, exec: Execution) -> std::result::Result<Applied, ReplayError> {
    graph.begin_record(rec.seq);
    let applied = match &rec.body {
        RecordBody::Feed(f) => Applied::Feed(graph.apply_feed_union(&f.source, f.trust, &f.assertions)?),
        RecordBody::Feedback(fb) => Applied::Feedback(record_feedback(graph, fb)?),
        RecordBody::GraphOp { op, .. } => Applied::Op(graph.apply_op(op)?),
    };
    refresh_features(graph, exec);
    Ok(applied)
}

/// Why a log scan stopped early.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corruption {
    pub offset: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct LogScan {
    pub records: Vec<KBRecord>,
    /// Length of the valid prefix in bytes.
    pub valid_len: u64,
    pub corruption: Option<Corruption>,
}

/// Decodes framed records until the end of input or the first bad record.
/// Seqs must run 1, 2, 3, ... without gaps.
pub fn scan_log(bytes: &[u8]) -> LogScan {
    let mut scan = LogScan::default();
    let mut pos = 0usize;
    while pos < bytes.len() {
        match decode_at(bytes, pos, scan.records.len() as u64 + 1) {
            Ok((rec, next)) => {
                scan.records.push(rec);
                pos = next;
                scan.valid_len = pos as u64;
            }
            Err(reason) => {
                scan.corruption = Some(Corruption {
                    offset: pos as u64,
                    reason,
                });
                break;
            }
        }
    }
    scan
}

fn decode_at(bytes: &[u8], pos: usize, expected_seq: u64) -> std::result::Result<(KBRecord, usize), String> {
    let rest = &bytes[pos..];
    let nl = rest
        .iter()
        .take(32)
        .position(|&b| b == b'\n')
        .ok_or("missing frame header")?;
    let header = std::str::from_utf8(&rest[..nl]).map_err(|_| "frame header is not text")?;
    let (len, crc) = header.split_once(' ').ok_or("malformed frame header")?;
    let len: usize = len.parse().map_err(|_| "bad frame length")?;
    let crc = u32::from_str_radix(crc, 16).map_err(|_| "bad frame checksum")?;
    let start = nl + 1;
    let end = start.checked_add(len).ok_or("bad frame length")?;
    if end >= rest.len() {
        return Err("truncated record".into());
    }
    if rest[end] != b'\n' {
        return Err("missing record terminator".into());
    }
    let json = &rest[start..end];
    if crc32fast::hash(json) != crc {
        return Err("checksum mismatch".into());
    }
    let rec: KBRecord = serde_json::from_slice(json).map_err(|e| format!("undecodable record: {e}"))?;
    if rec.seq != expected_seq {
        return Err(format!("expected seq {expected_seq}, found {}", rec.seq));
    }
    Ok((rec, pos + end + 1))
}

/// A bad log tail moved aside during recovery.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quarantine {
    pub offset: u64,
    pub reason: String,
    pub path: PathBuf,
    pub bytes: u64,
}

/// Writer handle on `kb.log`.
#[derive(Debug)]
pub struct Log {
    path: PathBuf,
    file: File,
    len: u64,
    next_seq: u64,
    fsync: bool,
}

impl Log {
    /// Opens or creates the log, returning its records. A corrupt or torn
    /// tail is copied to `kb.log.quarantine-{offset}` and cut off so that
    /// appends continue after the last good record.
    pub fn open(path: impl AsRef<Path>, fsync: bool) -> Result<(Log, Vec<KBRecord>, Option<Quarantine>)> {
        let path = path.as_ref().to_owned();
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(io_err(&path)(e)),
        };
        let scan = scan_log(&bytes);
        let mut quarantine = None;
        if let Some(c) = scan.corruption {
            let qpath = quarantine_path(&path, c.offset);
            fs::write(&qpath, &bytes[c.offset as usize..]).map_err(io_err(&qpath))?;
            tracing::warn!(offset = c.offset, reason = %c.reason, file = %qpath.display(), "quarantined log tail");
            quarantine = Some(Quarantine {
                offset: c.offset,
                reason: c.reason,
                path: qpath,
                bytes: bytes.len() as u64 - c.offset,
            });
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(io_err(&path))?;
        if quarantine.is_some() {
            file.set_len(scan.valid_len).map_err(io_err(&path))?;
            file.sync_all().map_err(io_err(&path))?;
        }
        let log = Log {
            len: scan.valid_len,
            next_seq: scan.records.len() as u64 + 1,
            path,
            file,
            fsync,
        };
        Ok((log, scan.records, quarantine))
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn next_seq(&self) -> u64 {
        self.next_seq
    }

    /// Last appended seq, 0 for an empty log.
    pub fn last_seq(&self) -> u64 {
        self.next_seq - 1
    }

    /// Appends records whose seqs continue the log. Durable on return. On
    /// failure nothing is appended.
    pub fn append(&mut self, records: &[KBRecord]) -> Result<()> {
        let mut buf = Vec::new();
        for (i, r) in records.iter().enumerate() {
            let expected = self.next_seq + i as u64;
            if r.seq != expected {
                return Err(StoreError::SeqOutOfOrder {
                    expected,
                    found: r.seq,
                });
            }
            buf.extend(r.encode());
        }
        let written = self.file.write_all(&buf).and_then(|_| {
            if self.fsync {
                self.file.sync_data()
            } else {
                Ok(())
            }
        });
        if let Err(e) = written {
            // best effort: cut any partial write so the next open sees a clean tail
            let _ = self.file.set_len(self.len);
            return Err(io_err(&self.path)(e));
        }
        self.len += buf.len() as u64;
        self.next_seq += records.len() as u64;
        Ok(())
    }
}

fn quarantine_path(log: &Path, offset: u64) -> PathBuf {
    let mut name = log.file_name().unwrap_or_default().to_owned();
    name.push(format!(".quarantine-{offset}"));
    log.with_file_name(name)
}

/// Replays `records` on top of `base`, which must reflect every record
/// before the first one given.
pub fn replay(mut base: Graph, records: &[KBRecord], exec: Execution) -> Result<Graph> {
    for rec in records {
        apply_record(&mut base, rec, exec).map_err(|source| StoreError::Replay { seq: rec.seq, source })?;
    }
    Ok(base)
}

pub fn rebuild(edge_types: &EdgeTypeRegistry, records: &[KBRecord], exec: Execution) -> Result<Graph> {
    replay(Graph::new(edge_types.clone()), records, exec)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExclusionReport {
    /// Records from the excluded sources.
    pub excluded: Vec<u64>,
    /// Records that no longer applied once those were gone.
    pub skipped: Vec<u64>,
}

/// Rebuilds without the given sources. Inference ops triggered by their
/// feeds are dropped as well, and any later record that no longer applies
/// is skipped.
pub fn rebuild_excluding(
    edge_types: &EdgeTypeRegistry,
    records: &[KBRecord],
    sources: &BTreeSet<String>,
    exec: Execution,
) -> (Graph, ExclusionReport) {
    let mut graph = Graph::new(edge_types.clone());
    let mut report = ExclusionReport::default();
    let mut dropped_feeds = BTreeSet::new();
    for rec in records {
        let from_excluded = rec.source().is_some_and(|s| sources.contains(s));
        let caused_by_excluded = matches!(
            &rec.body,
            RecordBody::GraphOp { origin: OpOrigin::Inference { feed_id }, .. } if dropped_feeds.contains(feed_id)
        );
        if from_excluded || caused_by_excluded {
            if let RecordBody::Feed(f) = &rec.body {
                dropped_feeds.insert(f.feed_id.clone());
            }
            report.excluded.push(rec.seq);
            continue;
        }
        let mut trial = graph.clone();
        match apply_record(&mut trial, rec, exec) {
            Ok(_) => graph = trial,
            Err(e) => {
                tracing::debug!(seq = rec.seq, error = %e, "skipped during exclusion rebuild");
                report.skipped.push(rec.seq);
            }
        }
    }
    (graph, report)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Snapshot {
    pub format_version: u32,
    pub up_to_seq: u64,
    pub graph: Graph,
}

impl Snapshot {
    pub fn new(up_to_seq: u64, graph: Graph) -> Self {
        Self {
            format_version: SNAPSHOT_FORMAT_VERSION,
            up_to_seq,
            graph,
        }
    }
}

fn snapshot_name(seq: u64) -> String {
    format!("snap-{seq:020}.json")
}

pub fn write_snapshot(dir: impl AsRef<Path>, snap: &Snapshot) -> Result<PathBuf> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join(snapshot_name(snap.up_to_seq));
    let tmp = path.with_extension("json.tmp");
    let body = serde_json::to_vec(snap).expect("snapshots always serialize");
    let write = || -> io::Result<()> {
        let mut f = File::create(&tmp)?;
        f.write_all(&body)?;
        f.sync_all()?;
        fs::rename(&tmp, &path)
    };
    write().map_err(io_err(&path))?;
    Ok(path)
}

pub fn load_snapshot(path: impl AsRef<Path>) -> Result<Snapshot> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(io_err(path))?;
    let bad = |message: String| StoreError::Snapshot {
        path: path.to_owned(),
        message,
    };
    #[derive(Deserialize)]
    struct Version {
        format_version: u32,
    }
    let v: Version = serde_json::from_slice(&bytes).map_err(|e| bad(e.to_string()))?;
    if v.format_version != SNAPSHOT_FORMAT_VERSION {
        return Err(bad(format!(
            "format version {} is not supported (expected {SNAPSHOT_FORMAT_VERSION})",
            v.format_version
        )));
    }
    let mut snap: Snapshot = serde_json::from_slice(&bytes).map_err(|e| bad(e.to_string()))?;
    snap.graph.take_dirty();
    Ok(snap)
}

/// The newest snapshot at or below `max_seq`, skipping unreadable ones.
pub fn latest_snapshot(dir: impl AsRef<Path>, max_seq: u64) -> Option<Snapshot> {
    let mut seqs: Vec<u64> = fs::read_dir(dir.as_ref())
        .ok()?
        .filter_map(|e| {
            let name = e.ok()?.file_name().into_string().ok()?;
            name.strip_prefix("snap-")?.strip_suffix(".json")?.parse().ok()
        })
        .filter(|&s| s <= max_seq)
        .collect();
    seqs.sort_unstable();
    seqs.into_iter().rev().find_map(|s| {
        load_snapshot(dir.as_ref().join(snapshot_name(s)))
            .map_err(|e| tracing::warn!(error = %e, "ignoring snapshot"))
            .ok()
    })
}

/// Layout of a data directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataDir {
    root: PathBuf,
}

impl DataDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    /// An explicit path wins over `BRAIN_DATA_DIR`, which wins over `./brain-data`.
    pub fn resolve(explicit: Option<PathBuf>) -> Self {
        let root = explicit
            .or_else(|| env::var_os(DATA_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("brain-data"));
        Self::new(root)
    }

    pub fn create(&self) -> Result<()> {
        for d in [self.root.clone(), self.snapshots(), self.media()] {
            fs::create_dir_all(&d).map_err(io_err(&d))?;
        }
        Ok(())
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn log(&self) -> PathBuf {
        self.root.join("kb.log")
    }

    pub fn snapshots(&self) -> PathBuf {
        self.root.join("snapshots")
    }

    pub fn media(&self) -> PathBuf {
        self.root.join("media")
    }

    pub fn sources(&self) -> PathBuf {
        self.root.join("sources.toml")
    }

    pub fn config(&self) -> PathBuf {
        self.root.join("brain.toml")
    }
}
