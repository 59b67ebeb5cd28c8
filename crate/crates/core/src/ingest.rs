//! Feed files and the source trust registry.
//!
//! A feed is UTF-8 JSON Lines: one header object followed by one assertion
//! per line.
//!
//! ```text
//! {"source":"wordnet","source_version":"3.1","back_pointer":"https://wordnet.princeton.edu"}
//! {"src":{"name":"cup","type":"Concept"},"edge":"IsTypeOf","dst":{"name":"container","type":"Concept"}}
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Assertion, EdgeTypeRegistry, EndpointDescriptor};

/// Trust given to sources seen for the first time.
pub const DEFAULT_TRUST: f64 = 0.5;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("feed has no assertions (assertions nonempty)")]
    Empty,
    #[error("unregistered edge type(s): {}", .0.join(", "))]
    UnknownEdgeTypes(Vec<String>),
    #[error("trust {trust} for source {id:?} is outside [0, 1]")]
    TrustOutOfRange { id: String, trust: f64 },
    #[error("source registry: {0}")]
    Registry(String),
}

impl IngestError {
    /// Errors the caller can fix by changing the input.
    pub fn is_user_error(&self) -> bool {
        !matches!(self, IngestError::Io { .. })
    }
}

pub type Result<T> = std::result::Result<T, IngestError>;

/// A validated batch of assertions from one source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Feed {
    pub feed_id: String,
    pub source: String,
    pub source_version: String,
    pub timestamp: DateTime<Utc>,
    pub back_pointer: String,
    /// Source trust at ingest time; fixed here so replays do not depend on
    /// later registry edits.
    pub trust: f64,
    pub assertions: Vec<Assertion>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    source: String,
    #[serde(default)]
    source_version: String,
    #[serde(default)]
    back_pointer: String,
    timestamp: Option<DateTime<Utc>>,
    feed_id: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Line {
    src: EndpointDescriptor,
    edge: String,
    dst: EndpointDescriptor,
    media_ref: Option<String>,
}

/// A parsed feed before registry lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct RawFeed {
    pub feed_id: Option<String>,
    pub source: String,
    pub source_version: String,
    pub timestamp: Option<DateTime<Utc>>,
    pub back_pointer: String,
    pub assertions: Vec<Assertion>,
}

fn malformed(line: usize, message: impl Into<String>) -> IngestError {
    IngestError::Malformed {
        line,
        message: message.into(),
    }
}

fn check_endpoint(line: usize, side: &str, d: &mut EndpointDescriptor) -> Result<()> {
    d.name = d.name.trim().to_owned();
    d.node_type = d.node_type.trim().to_owned();
    if d.name.is_empty() {
        return Err(malformed(line, format!("{side} name is empty")));
    }
    if d.node_type.is_empty() {
        return Err(malformed(line, format!("{side} type is empty")));
    }
    Ok(())
}

/// Parses feed text. Pure: no registry access and no clock.
pub fn parse_feed_text(text: &str, edge_types: &EdgeTypeRegistry) -> Result<RawFeed> {
    let mut header: Option<Header> = None;
    let mut assertions = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let raw = raw.trim();
        if raw.is_empty() {
            continue;
        }
        if header.is_none() {
            let h: Header = serde_json::from_str(raw).map_err(|e| malformed(line, format!("bad header: {e}")))?;
            if h.source.trim().is_empty() {
                return Err(malformed(line, "header source is empty"));
            }
            header = Some(h);
            continue;
        }
        let mut l: Line = serde_json::from_str(raw).map_err(|e| malformed(line, e.to_string()))?;
        check_endpoint(line, "src", &mut l.src)?;
        check_endpoint(line, "dst", &mut l.dst)?;
        if let Some(m) = l.media_ref {
            l.src.media_ref.get_or_insert(m);
        }
        let edge = l.edge.split_whitespace().collect::<String>();
        if edge.is_empty() {
            return Err(malformed(line, "edge type is empty"));
        }
        if l.src.name == l.dst.name && l.src.node_type == l.dst.node_type {
            return Err(malformed(line, format!("assertion relates {:?} to itself", l.src.name)));
        }
        assertions.push(Assertion::new(l.src, edge, l.dst));
    }
    let Some(h) = header else {
        return Err(IngestError::Empty);
    };
    if assertions.is_empty() {
        return Err(IngestError::Empty);
    }
    let unknown = edge_types.unknown(assertions.iter().map(|a| a.edge_type.as_str()));
    if !unknown.is_empty() {
        return Err(IngestError::UnknownEdgeTypes(unknown));
    }
    Ok(RawFeed {
        feed_id: h.feed_id,
        source: h.source.trim().to_owned(),
        source_version: h.source_version,
        timestamp: h.timestamp,
        back_pointer: h.back_pointer,
        assertions,
    })
}

impl RawFeed {
    /// Stamps id, time and trust. Unknown sources are registered at
    /// [`DEFAULT_TRUST`].
    pub fn stamp(self, sources: &mut SourceRegistry, now: DateTime<Utc>) -> Feed {
        let trust = sources.trust_or_register(&self.source);
        Feed {
            feed_id: self.feed_id.unwrap_or_else(|| uuid::Uuid::new_v4().to_string()),
            source: self.source,
            source_version: self.source_version,
            timestamp: self.timestamp.unwrap_or(now),
            back_pointer: self.back_pointer,
            trust,
            assertions: self.assertions,
        }
    }
}

pub fn parse_feed_str(text: &str, edge_types: &EdgeTypeRegistry, sources: &mut SourceRegistry) -> Result<Feed> {
    Ok(parse_feed_text(text, edge_types)?.stamp(sources, Utc::now()))
}

pub fn parse_feed_file(
    path: impl AsRef<Path>,
    edge_types: &EdgeTypeRegistry,
    sources: &mut SourceRegistry,
) -> Result<Feed> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_feed_str(&text, edge_types, sources)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceInfo {
    pub trust: f64,
    #[serde(default)]
    pub description: String,
}

/// Source id to trust. Persisted as `sources.toml`:
///
/// ```toml
/// [sources.wordnet]
/// trust = 0.9
/// description = "lexical database"
/// ```
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SourceRegistry {
    #[serde(default)]
    pub sources: BTreeMap<String, SourceInfo>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub audit: Vec<String>,
}

impl SourceRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let reg: SourceRegistry = toml::from_str(text).map_err(|e| IngestError::Registry(e.to_string()))?;
        for (id, info) in &reg.sources {
            check_trust(id, info.trust)?;
        }
        Ok(reg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("registry always serializes")
    }

    /// Loads `path`, or an empty registry if it does not exist.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        match fs::read_to_string(path) {
            Ok(text) => Self::from_toml(&text),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(Self::new()),
            Err(source) => Err(IngestError::Io {
                path: path.to_owned(),
                source,
            }),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let io_err = |source| IngestError::Io {
            path: path.to_owned(),
            source,
        };
        let tmp = path.with_extension("toml.tmp");
        fs::write(&tmp, self.to_toml()).map_err(io_err)?;
        fs::rename(&tmp, path).map_err(io_err)
    }

    pub fn get(&self, id: &str) -> Option<&SourceInfo> {
        self.sources.get(id)
    }

    pub fn trust(&self, id: &str) -> Option<f64> {
        self.sources.get(id).map(|s| s.trust)
    }

    /// Registers or overwrites `id`. Overwrites are recorded in the audit trail.
    pub fn register(&mut self, id: &str, trust: f64, description: &str) -> Result<()> {
        check_trust(id, trust)?;
        let info = SourceInfo {
            trust,
            description: description.to_owned(),
        };
        if let Some(old) = self.sources.insert(id.to_owned(), info) {
            self.audit.push(format!(
                "{} {id}: trust {} -> {trust}",
                Utc::now().to_rfc3339(),
                old.trust
            ));
        }
        Ok(())
    }

    pub fn trust_or_register(&mut self, id: &str) -> f64 {
        if let Some(t) = self.trust(id) {
            return t;
        }
        self.sources.insert(
            id.to_owned(),
            SourceInfo {
                trust: DEFAULT_TRUST,
                description: "auto-registered on first feed".to_owned(),
            },
        );
        DEFAULT_TRUST
    }
}

fn check_trust(id: &str, trust: f64) -> Result<()> {
    if (0.0..=1.0).contains(&trust) {
        Ok(())
    } else {
        Err(IngestError::TrustOutOfRange {
            id: id.to_owned(),
            trust,
        })
    }
}
