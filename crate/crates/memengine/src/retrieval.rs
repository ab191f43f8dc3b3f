//! Query construction and top-K scoring over the long-term store.
//!
//! Record score =
//! `(w_context * anchor_cos + w_affect * affect_sim) * sqrt(strength / cap) * exp(-age / tau)`,
//! floored at zero. Hits must clear `min_score`; ties break toward the
//! older (smaller) record id so results are fully deterministic.

use serde::{Deserialize, Serialize};

use crate::affect::{
    affect_similarity, blend_affect, neutral_affect, weighted_blend_affect, AffectState,
    ContextAnchor, EmotionMemoryUnit,
};
use crate::error::{Error, Result};
use crate::ltm::{LtmRecord, LtmStore, ScoredHit, STRENGTH_CAP};
use crate::working_memory::WorkingMemoryState;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalConfig {
    #[serde(default = "default_top_k")]
    pub top_k: usize,
    #[serde(default = "default_min_score")]
    pub min_score: f64,
    #[serde(default = "default_w_context")]
    pub w_context: f64,
    #[serde(default = "default_w_affect")]
    pub w_affect: f64,
    #[serde(default = "default_recency_tau")]
    pub recency_tau: f64,
}

fn default_top_k() -> usize {
    4
}
fn default_min_score() -> f64 {
    0.15
}
fn default_w_context() -> f64 {
    0.6
}
fn default_w_affect() -> f64 {
    0.4
}
fn default_recency_tau() -> f64 {
    50.0
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        RetrievalConfig {
            top_k: 4,
            min_score: 0.15,
            w_context: 0.6,
            w_affect: 0.4,
            recency_tau: 50.0,
        }
    }
}

impl RetrievalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.top_k < 1 {
            return Err(Error::Config("top_k must be at least 1".into()));
        }
        if (self.w_context + self.w_affect - 1.0).abs() > 1e-9 {
            return Err(Error::Config("w_context + w_affect must equal 1".into()));
        }
        if self.recency_tau <= 0.0 {
            return Err(Error::Config("recency_tau must be positive".into()));
        }
        Ok(())
    }
}

/// The retrieval cue for one turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalQuery {
    pub anchor: ContextAnchor,
    pub affect: AffectState,
    pub now: u64,
}

/// Retrieval output: scored hits, their blended affect, and a confidence in
/// [0, 1) that grows with total hit score mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalResult {
    pub hits: Vec<ScoredHit>,
    pub memory_summary: AffectState,
    pub confidence: f64,
}

impl RetrievalResult {
    pub fn empty(label_count: usize) -> Self {
        RetrievalResult {
            hits: Vec::new(),
            memory_summary: neutral_affect(label_count),
            confidence: 0.0,
        }
    }
}

/// Multiplicative factors of one record's score, exposed by the `inspect`
/// command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreBreakdown {
    pub id: u64,
    pub score: f64,
    pub context_term: f64,
    pub affect_term: f64,
    pub strength_factor: f64,
    pub recency_factor: f64,
}

/// Build the query from the current EMU and the working-memory state: the
/// query affect is the midpoint of the EMU affect and the short-term
/// aggregate (the EMU affect alone when the window is empty).
pub fn build_query(emu: &EmotionMemoryUnit, wm: &WorkingMemoryState) -> RetrievalQuery {
    let affect = if wm.is_empty() {
        emu.affect.clone()
    } else {
        blend_affect(&emu.affect, &wm.aggregate, 0.5).expect("blend weight 0.5 is valid")
    };
    RetrievalQuery { anchor: emu.anchor.clone(), affect, now: emu.timestamp }
}

/// Score one record against a query, with the factor decomposition.
pub fn score_record(record: &LtmRecord, query: &RetrievalQuery, cfg: &RetrievalConfig) -> ScoreBreakdown {
    let context_term = record.anchor.cosine(&query.anchor);
    let affect_term = affect_similarity(&record.affect, &query.affect);
    let strength_factor = (record.strength / STRENGTH_CAP).max(0.0).sqrt();
    let age = query.now.saturating_sub(record.last_activated) as f64;
    let recency_factor = (-age / cfg.recency_tau).exp();
    let raw = (cfg.w_context * context_term + cfg.w_affect * affect_term)
        * strength_factor
        * recency_factor;
    ScoreBreakdown {
        id: record.id,
        score: raw.max(0.0),
        context_term,
        affect_term,
        strength_factor,
        recency_factor,
    }
}

/// Full-scan top-K retrieval. An empty store yields no hits, a neutral
/// summary, and zero confidence.
pub fn retrieve(store: &LtmStore, query: &RetrievalQuery, cfg: &RetrievalConfig) -> RetrievalResult {
    let label_count = query.affect.label_count();
    let mut scored: Vec<ScoredHit> = store
        .records
        .iter()
        .map(|r| score_record(r, query, cfg))
        .filter(|b| b.score >= cfg.min_score)
        .map(|b| ScoredHit { id: b.id, score: b.score })
        .collect();
    scored.sort_by(|a, b| {
        b.score
            .partial_cmp(&a.score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.id.cmp(&b.id))
    });
    scored.truncate(cfg.top_k);

    if scored.is_empty() {
        return RetrievalResult::empty(label_count);
    }
    let items: Vec<(&AffectState, f64)> = scored
        .iter()
        .map(|h| (&store.get(h.id).expect("hit id exists").affect, h.score))
        .collect();
    let memory_summary = weighted_blend_affect(&items);
    let total: f64 = scored.iter().map(|h| h.score).sum();
    RetrievalResult { hits: scored, memory_summary, confidence: 1.0 - (-total).exp() }
}

/// Record that the given hits were activated at `now`: bumps activation
/// counts and `last_activated`. Strength is untouched here.
pub fn mark_activated(store: &mut LtmStore, hits: &[ScoredHit], now: u64) -> Result<()> {
    for hit in hits {
        let record = store.get_mut(hit.id).ok_or(Error::MissingRecord(hit.id))?;
        record.activation_count += 1;
        record.last_activated = now;
    }
    Ok(())
}
