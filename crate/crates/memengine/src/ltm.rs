//! Long-term affective memory: the consolidated record store, the
//! salience/repetition/relevance consolidation gate, and durable
//! persistence (canonical snapshot + append journal).
//!
//! The store is single-writer. Records live in a vector kept sorted by id,
//! which doubles as the canonical serialization order, so a snapshot of a
//! given state is byte-stable.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::affect::{AffectState, ContextAnchor};
use crate::error::{Error, Result};

/// Upper bound on record strength.
pub const STRENGTH_CAP: f64 = 10.0;

/// Bounded size of the anchor-repetition tally.
pub const TALLY_CAPACITY: usize = 64;

/// Snapshot format identifier.
pub const SNAPSHOT_FORMAT: &str = "memengine-ltm-snapshot";
/// Current snapshot/journal format version.
pub const FORMAT_VERSION: u32 = 1;

/// One consolidated long-term trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LtmRecord {
    pub id: u64,
    pub affect: AffectState,
    pub anchor: ContextAnchor,
    pub salience: f64,
    pub strength: f64,
    pub activation_count: u64,
    pub created_at: u64,
    pub last_updated: u64,
    pub last_activated: u64,
}

/// Consolidation gate settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsolidationConfig {
    /// Salience gate threshold.
    #[serde(default = "default_salience_threshold")]
    pub salience_threshold: f64,
    /// Number of similar-anchor sightings that opens the repetition gate.
    #[serde(default = "default_repeat_threshold")]
    pub repeat_threshold: u64,
    /// Exact anchor similarity required for a tally entry to count.
    #[serde(default = "default_anchor_repeat_sim")]
    pub anchor_repeat_sim: f64,
    /// Scales the initial strength `0.5 + salience`.
    #[serde(default = "default_initial_strength_gain")]
    pub initial_strength_gain: f64,
}

fn default_salience_threshold() -> f64 {
    0.6
}
fn default_repeat_threshold() -> u64 {
    3
}
fn default_anchor_repeat_sim() -> f64 {
    0.85
}
fn default_initial_strength_gain() -> f64 {
    1.0
}

impl Default for ConsolidationConfig {
    fn default() -> Self {
        ConsolidationConfig {
            salience_threshold: 0.6,
            repeat_threshold: 3,
            anchor_repeat_sim: 0.85,
            initial_strength_gain: 1.0,
        }
    }
}

impl ConsolidationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.salience_threshold) {
            return Err(Error::Config("salience_threshold must be in [0, 1]".into()));
        }
        if self.repeat_threshold < 1 {
            return Err(Error::Config("repeat_threshold must be at least 1".into()));
        }
        if !(self.anchor_repeat_sim > 0.0 && self.anchor_repeat_sim <= 1.0) {
            return Err(Error::Config("anchor_repeat_sim must be in (0, 1]".into()));
        }
        Ok(())
    }
}

/// One entry of the bounded anchor-repetition tally (LRU order: the last
/// element is the most recently touched).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TallyEntry {
    pub fingerprint: u64,
    pub anchor: ContextAnchor,
    pub count: u64,
}

/// Sign-quantized fingerprint of a unit anchor embedding.
pub fn anchor_fingerprint(anchor: &ContextAnchor) -> u64 {
    let mut bits: u64 = 0;
    for (i, &x) in anchor.embedding.iter().take(64).enumerate() {
        if x >= 0.0 {
            bits |= 1 << i;
        }
    }
    bits
}

/// The long-term store: records sorted by id plus the repetition tally.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct LtmStore {
    pub records: Vec<LtmRecord>,
    pub next_id: u64,
    pub recent_anchor_counts: Vec<TallyEntry>,
}

impl LtmStore {
    pub fn new() -> Self {
        LtmStore::default()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: u64) -> Option<&LtmRecord> {
        self.records.binary_search_by_key(&id, |r| r.id).ok().map(|i| &self.records[i])
    }

    pub fn get_mut(&mut self, id: u64) -> Option<&mut LtmRecord> {
        match self.records.binary_search_by_key(&id, |r| r.id) {
            Ok(i) => Some(&mut self.records[i]),
            Err(_) => None,
        }
    }

    pub(crate) fn remove(&mut self, id: u64) -> Option<LtmRecord> {
        match self.records.binary_search_by_key(&id, |r| r.id) {
            Ok(i) => Some(self.records.remove(i)),
            Err(_) => None,
        }
    }

    /// Total tallied sightings of anchors exactly similar to `anchor` at or
    /// above `min_sim`, across the bounded window.
    fn repetition_support(&self, anchor: &ContextAnchor, min_sim: f64) -> u64 {
        self.recent_anchor_counts
            .iter()
            .filter(|e| e.anchor.cosine(anchor) >= min_sim)
            .map(|e| e.count)
            .sum()
    }

    fn tally_touch(&mut self, anchor: &ContextAnchor) {
        let fp = anchor_fingerprint(anchor);
        if let Some(pos) = self.recent_anchor_counts.iter().position(|e| e.fingerprint == fp) {
            let mut entry = self.recent_anchor_counts.remove(pos);
            entry.count += 1;
            entry.anchor = anchor.clone();
            self.recent_anchor_counts.push(entry);
        } else {
            self.recent_anchor_counts.push(TallyEntry {
                fingerprint: fp,
                anchor: anchor.clone(),
                count: 1,
            });
        }
        while self.recent_anchor_counts.len() > TALLY_CAPACITY {
            self.recent_anchor_counts.remove(0);
        }
    }

    /// Gate the short-term state into long-term memory.
    ///
    /// A record is written iff the salience gate, the anchor-repetition gate
    /// (counting the current sighting), or the decision-relevance gate opens.
    /// Rejection is a normal outcome: the anchor tally is incremented and
    /// `None` returned.
    pub fn consolidate(
        &mut self,
        stm_affect: &AffectState,
        stm_anchor: &ContextAnchor,
        stm_salience: f64,
        now: u64,
        cfg: &ConsolidationConfig,
        decision_relevant: bool,
    ) -> Option<LtmRecord> {
        let salience_gate = stm_salience >= cfg.salience_threshold;
        let repetition_gate =
            self.repetition_support(stm_anchor, cfg.anchor_repeat_sim) + 1 >= cfg.repeat_threshold;
        if !(salience_gate || repetition_gate || decision_relevant) {
            self.tally_touch(stm_anchor);
            return None;
        }
        let record = LtmRecord {
            id: self.next_id,
            affect: stm_affect.clone(),
            anchor: stm_anchor.clone(),
            salience: stm_salience.clamp(0.0, 1.0),
            strength: (cfg.initial_strength_gain * (0.5 + stm_salience)).min(STRENGTH_CAP),
            activation_count: 1,
            created_at: now,
            last_updated: now,
            last_activated: now,
        };
        self.next_id += 1;
        self.records.push(record.clone());
        Some(record)
    }

    /// Canonical snapshot text: a version header line followed by the store
    /// JSON on the second line.
    pub fn snapshot_string(&self) -> String {
        let header = serde_json::json!({ "format": SNAPSHOT_FORMAT, "version": FORMAT_VERSION });
        format!("{}\n{}\n", header, serde_json::to_string(self).expect("store serializes"))
    }

    pub fn snapshot(&self, path: &Path) -> Result<()> {
        fs::write(path, self.snapshot_string())?;
        Ok(())
    }

    pub fn restore_str(text: &str) -> Result<LtmStore> {
        let mut lines = text.splitn(2, '\n');
        let header_line = lines.next().unwrap_or("");
        let header: serde_json::Value = serde_json::from_str(header_line)
            .map_err(|e| snapshot_corrupt(text, 0, header_line, &e))?;
        if header.get("format").and_then(|f| f.as_str()) != Some(SNAPSHOT_FORMAT) {
            return Err(Error::Version {
                found: header.get("format").map(|f| f.to_string()).unwrap_or_else(|| "missing".into()),
                expected: SNAPSHOT_FORMAT.into(),
            });
        }
        let version = header.get("version").and_then(|v| v.as_u64()).unwrap_or(0);
        if version != FORMAT_VERSION as u64 {
            return Err(Error::Version {
                found: format!("version {version}"),
                expected: format!("version {FORMAT_VERSION}"),
            });
        }
        let body = lines.next().unwrap_or("");
        let body_offset = header_line.len() + 1;
        serde_json::from_str(body.trim_end_matches('\n'))
            .map_err(|e| snapshot_corrupt(text, body_offset, body, &e))
    }

    pub fn restore(path: &Path) -> Result<LtmStore> {
        LtmStore::restore_str(&fs::read_to_string(path)?)
    }
}

/// Translate a serde line/column position into an absolute byte offset.
fn snapshot_corrupt(full: &str, base: usize, segment: &str, err: &serde_json::Error) -> Error {
    let line = err.line();
    let column = err.column();
    let mut offset = base;
    for (i, l) in segment.split('\n').enumerate() {
        if i + 1 == line {
            offset += column.saturating_sub(1);
            break;
        }
        offset += l.len() + 1;
    }
    Error::SnapshotCorrupt { offset: offset.min(full.len()), detail: err.to_string() }
}

/// A decision reduced to what memory maintenance needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionSignal {
    pub affect: AffectState,
    pub confidence: f64,
}

/// One scored retrieval hit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredHit {
    pub id: u64,
    pub score: f64,
}

/// A journal line: the operation name, its full input payload, and the turn
/// it ran at. Replaying the ops in order reproduces the store exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JournalLine {
    pub op: String,
    pub payload: serde_json::Value,
    pub turn: u64,
}

/// Typed journal operations. Serialized through [`JournalLine`].
#[derive(Debug, Clone, PartialEq)]
pub enum JournalOp {
    /// Written once at the head of a journal: the configs replay needs.
    Init { consolidation: ConsolidationConfig, lifecycle_json: serde_json::Value },
    MarkActivated { ids: Vec<u64> },
    Reinforce { hits: Vec<ScoredHit>, decision: DecisionSignal },
    ResolveConflict { hit_ids: Vec<u64>, decision: DecisionSignal },
    Consolidate {
        affect: AffectState,
        anchor: ContextAnchor,
        salience: f64,
        decision_relevant: bool,
    },
    Decay,
    MergePass,
}

impl JournalOp {
    pub fn to_line(&self, turn: u64) -> JournalLine {
        let (op, payload) = match self {
            JournalOp::Init { consolidation, lifecycle_json } => (
                "init",
                serde_json::json!({ "consolidation": consolidation, "lifecycle": lifecycle_json }),
            ),
            JournalOp::MarkActivated { ids } => ("mark_activated", serde_json::json!({ "ids": ids })),
            JournalOp::Reinforce { hits, decision } => {
                ("reinforce", serde_json::json!({ "hits": hits, "decision": decision }))
            }
            JournalOp::ResolveConflict { hit_ids, decision } => {
                ("resolve_conflict", serde_json::json!({ "hit_ids": hit_ids, "decision": decision }))
            }
            JournalOp::Consolidate { affect, anchor, salience, decision_relevant } => (
                "consolidate",
                serde_json::json!({
                    "affect": affect,
                    "anchor": anchor,
                    "salience": salience,
                    "decision_relevant": decision_relevant,
                }),
            ),
            JournalOp::Decay => ("decay", serde_json::json!({})),
            JournalOp::MergePass => ("merge_pass", serde_json::json!({})),
        };
        JournalLine { op: op.into(), payload, turn }
    }

    pub fn from_line(line: &JournalLine) -> Result<JournalOp> {
        fn field<T: serde::de::DeserializeOwned>(payload: &serde_json::Value, key: &str) -> Result<T> {
            let v = payload
                .get(key)
                .ok_or_else(|| Error::Domain(format!("journal payload missing field {key}")))?;
            Ok(serde_json::from_value(v.clone())?)
        }
        let op = match line.op.as_str() {
            "init" => JournalOp::Init {
                consolidation: field(&line.payload, "consolidation")?,
                lifecycle_json: line
                    .payload
                    .get("lifecycle")
                    .cloned()
                    .unwrap_or(serde_json::Value::Null),
            },
            "mark_activated" => JournalOp::MarkActivated { ids: field(&line.payload, "ids")? },
            "reinforce" => JournalOp::Reinforce {
                hits: field(&line.payload, "hits")?,
                decision: field(&line.payload, "decision")?,
            },
            "resolve_conflict" => JournalOp::ResolveConflict {
                hit_ids: field(&line.payload, "hit_ids")?,
                decision: field(&line.payload, "decision")?,
            },
            "consolidate" => JournalOp::Consolidate {
                affect: field(&line.payload, "affect")?,
                anchor: field(&line.payload, "anchor")?,
                salience: field(&line.payload, "salience")?,
                decision_relevant: field(&line.payload, "decision_relevant")?,
            },
            "decay" => JournalOp::Decay,
            "merge_pass" => JournalOp::MergePass,
            other => return Err(Error::Domain(format!("unknown journal op: {other}"))),
        };
        Ok(op)
    }
}

/// Buffered append-journal writer (JSONL, one op per line).
#[derive(Debug)]
pub struct JournalWriter {
    file: fs::File,
}

impl JournalWriter {
    pub fn create(path: &Path) -> Result<Self> {
        Ok(JournalWriter { file: fs::File::create(path)? })
    }

    pub fn append(&mut self, op: &JournalOp, turn: u64) -> Result<()> {
        let line = serde_json::to_string(&op.to_line(turn))?;
        writeln!(self.file, "{line}")?;
        Ok(())
    }
}

/// Parse a journal file into (line, op) pairs.
pub fn read_journal(text: &str) -> Result<Vec<(JournalLine, JournalOp)>> {
    let mut out = Vec::new();
    let mut offset = 0usize;
    for raw in text.split('\n') {
        if !raw.trim().is_empty() {
            let line: JournalLine = serde_json::from_str(raw).map_err(|e| Error::SnapshotCorrupt {
                offset: offset + e.column().saturating_sub(1),
                detail: e.to_string(),
            })?;
            let op = JournalOp::from_line(&line)?;
            out.push((line, op));
        }
        offset += raw.len() + 1;
    }
    Ok(out)
}
