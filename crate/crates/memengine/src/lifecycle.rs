//! Post-inference memory maintenance: decay, reinforcement, merging,
//! revision, conflict resolution, and the fixed-order `update` pipeline.
//!
//! The pipeline order is part of the contract:
//! mark_activated -> reinforce -> resolve_conflict -> consolidate -> decay
//! -> merge_pass. Every sub-operation can be journaled, and replaying the
//! journal over an empty store reproduces the live store exactly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::affect::{affect_similarity, blend_affect, AffectState, ContextAnchor};
use crate::error::{Error, Result};
use crate::ltm::{
    read_journal, ConsolidationConfig, DecisionSignal, JournalOp, JournalWriter, LtmRecord,
    LtmStore, ScoredHit, STRENGTH_CAP,
};
use crate::retrieval::mark_activated;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifecycleConfig {
    /// Per-turn decay rate.
    #[serde(default = "default_decay_eta")]
    pub decay_eta: f64,
    /// Records decayed below this strength are pruned.
    #[serde(default = "default_prune_floor")]
    pub prune_floor: f64,
    /// Strength added to an agreeing hit, scaled by its score share.
    #[serde(default = "default_reinforce_delta")]
    pub reinforce_delta: f64,
    /// Similarity (anchor cosine AND affect similarity) above which two
    /// records merge.
    #[serde(default = "default_merge_sim")]
    pub merge_sim: f64,
    /// Decision confidence required before a contradiction counts.
    #[serde(default = "default_conflict_confidence")]
    pub conflict_confidence: f64,
    /// Consecutive contradictions that trigger a revision.
    #[serde(default = "default_conflict_streak")]
    pub conflict_streak: u32,
    /// Blend rate of a revision toward the contradicting decision.
    #[serde(default = "default_revision_rate")]
    pub revision_rate: f64,
}

fn default_decay_eta() -> f64 {
    0.02
}
fn default_prune_floor() -> f64 {
    0.01
}
fn default_reinforce_delta() -> f64 {
    0.5
}
fn default_merge_sim() -> f64 {
    0.92
}
fn default_conflict_confidence() -> f64 {
    0.6
}
fn default_conflict_streak() -> u32 {
    3
}
fn default_revision_rate() -> f64 {
    0.3
}

impl Default for LifecycleConfig {
    fn default() -> Self {
        LifecycleConfig {
            decay_eta: 0.02,
            prune_floor: 0.01,
            reinforce_delta: 0.5,
            merge_sim: 0.92,
            conflict_confidence: 0.6,
            conflict_streak: 3,
            revision_rate: 0.3,
        }
    }
}

impl LifecycleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.decay_eta < 0.0 {
            return Err(Error::Config("decay_eta must be non-negative".into()));
        }
        if !(self.revision_rate > 0.0 && self.revision_rate <= 1.0) {
            return Err(Error::Config("revision_rate must be in (0, 1]".into()));
        }
        if self.conflict_streak < 1 {
            return Err(Error::Config("conflict_streak must be at least 1".into()));
        }
        Ok(())
    }
}

/// Per-record consecutive-contradiction counters.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConflictState {
    pub streaks: BTreeMap<u64, u32>,
}

impl ConflictState {
    pub fn new() -> Self {
        ConflictState::default()
    }
}

/// Time-sensitive forgetting: each record's strength is multiplied by
/// `exp(-eta * dt / (1 + salience))` with `dt = now - last_activated`;
/// records falling below the prune floor are removed. Records whose
/// strength actually changed get `last_updated = now`.
pub fn decay(store: &mut LtmStore, now: u64, cfg: &LifecycleConfig) {
    for record in &mut store.records {
        let dt = now.saturating_sub(record.last_activated) as f64;
        let factor = (-cfg.decay_eta * dt / (1.0 + record.salience)).exp();
        if factor < 1.0 {
            record.strength *= factor;
            record.last_updated = now;
        }
    }
    store.records.retain(|r| r.strength >= cfg.prune_floor);
}

/// Strengthen hits whose affect agrees with the decision, proportionally to
/// their share of the total retrieval score. Disagreeing hits are left for
/// conflict resolution.
pub fn reinforce(
    store: &mut LtmStore,
    hits: &[ScoredHit],
    decision: &DecisionSignal,
    cfg: &LifecycleConfig,
) -> Result<()> {
    let total: f64 = hits.iter().map(|h| h.score).sum();
    if total <= 0.0 {
        return Ok(());
    }
    for hit in hits {
        let record = store.get_mut(hit.id).ok_or(Error::MissingRecord(hit.id))?;
        if affect_similarity(&record.affect, &decision.affect) >= 0.0 {
            let share = hit.score / total;
            record.strength = (record.strength + cfg.reinforce_delta * share).min(STRENGTH_CAP);
        }
    }
    Ok(())
}

fn merge_records(a: &LtmRecord, b: &LtmRecord) -> LtmRecord {
    let total = a.strength + b.strength;
    let w = b.strength / total;
    let embedding: Vec<f64> = a
        .anchor
        .embedding
        .iter()
        .zip(&b.anchor.embedding)
        .map(|(x, y)| a.strength * x + b.strength * y)
        .collect();
    let mut tags = a.anchor.tags.clone();
    tags.extend(b.anchor.tags.iter().cloned());
    // Qualifying pairs have anchor cosine >= merge_sim > 0, so the weighted
    // sum cannot vanish.
    let anchor = ContextAnchor::new(embedding, tags).expect("merged anchor is non-degenerate");
    LtmRecord {
        id: a.id.min(b.id),
        affect: blend_affect(&a.affect, &b.affect, w).expect("strength share is in [0, 1]"),
        anchor,
        salience: (a.strength * a.salience + b.strength * b.salience) / total,
        strength: total.min(STRENGTH_CAP),
        activation_count: a.activation_count + b.activation_count,
        created_at: a.created_at.min(b.created_at),
        last_updated: a.last_updated.max(b.last_updated),
        last_activated: a.last_activated.max(b.last_activated),
    }
}

/// Merge highly similar records until no pair qualifies. Pairs are scanned
/// in ascending id order, which makes the result independent of insertion
/// order; the merged record keeps the smaller id.
pub fn merge_pass(store: &mut LtmStore, cfg: &LifecycleConfig) {
    loop {
        let mut merged_pair: Option<(u64, u64)> = None;
        'scan: for i in 0..store.records.len() {
            for j in (i + 1)..store.records.len() {
                let a = &store.records[i];
                let b = &store.records[j];
                if a.anchor.cosine(&b.anchor) >= cfg.merge_sim
                    && affect_similarity(&a.affect, &b.affect) >= cfg.merge_sim
                {
                    merged_pair = Some((a.id, b.id));
                    break 'scan;
                }
            }
        }
        match merged_pair {
            Some((id_a, id_b)) => {
                let b = store.remove(id_b).expect("scanned id exists");
                let a = store.get_mut(id_a).expect("scanned id exists");
                *a = merge_records(a, &b);
            }
            None => break,
        }
    }
}

/// Revision and conflict resolution.
///
/// A hit contradicts the decision when the valence signs oppose, both
/// magnitudes exceed 0.1, and the decision is confident. Contradictions
/// extend the hit's streak; anything else resets it. A streak reaching
/// `conflict_streak` revises the record toward the decision by
/// `revision_rate` and clears the streak; shorter streaks are treated as
/// temporary deviations and leave the record untouched.
pub fn resolve_conflict(
    store: &mut LtmStore,
    conflicts: &mut ConflictState,
    hits: &[ScoredHit],
    decision: &DecisionSignal,
    now: u64,
    cfg: &LifecycleConfig,
) -> Result<()> {
    for hit in hits {
        let record = store.get_mut(hit.id).ok_or(Error::MissingRecord(hit.id))?;
        let contradicts = record.affect.valence.signum() != decision.affect.valence.signum()
            && record.affect.valence.abs() > 0.1
            && decision.affect.valence.abs() > 0.1
            && decision.confidence >= cfg.conflict_confidence;
        if contradicts {
            let streak = conflicts.streaks.entry(hit.id).or_insert(0);
            *streak += 1;
            if *streak >= cfg.conflict_streak {
                record.affect = blend_affect(&record.affect, &decision.affect, cfg.revision_rate)?;
                record.last_updated = now;
                conflicts.streaks.remove(&hit.id);
            }
        } else {
            conflicts.streaks.remove(&hit.id);
        }
    }
    Ok(())
}

/// Everything `update` needs from the turn that just finished.
pub struct UpdateInputs<'a> {
    pub hits: &'a [ScoredHit],
    pub decision: DecisionSignal,
    pub stm_affect: &'a AffectState,
    pub stm_anchor: &'a ContextAnchor,
    pub stm_salience: f64,
    pub now: u64,
    /// Skips the consolidation step (long-term branch disabled).
    pub skip_consolidation: bool,
}

/// The full post-decision pipeline, in contract order. Returns the record
/// consolidated this turn, if any. Each step is journaled when a writer is
/// supplied.
pub fn update(
    store: &mut LtmStore,
    conflicts: &mut ConflictState,
    inputs: UpdateInputs<'_>,
    consolidation: &ConsolidationConfig,
    lifecycle: &LifecycleConfig,
    mut journal: Option<&mut JournalWriter>,
) -> Result<Option<LtmRecord>> {
    let now = inputs.now;
    let log = |op: JournalOp, journal: &mut Option<&mut JournalWriter>| -> Result<()> {
        if let Some(writer) = journal.as_deref_mut() {
            writer.append(&op, now)?;
        }
        Ok(())
    };

    mark_activated(store, inputs.hits, now)?;
    log(JournalOp::MarkActivated { ids: inputs.hits.iter().map(|h| h.id).collect() }, &mut journal)?;

    reinforce(store, inputs.hits, &inputs.decision, lifecycle)?;
    log(
        JournalOp::Reinforce { hits: inputs.hits.to_vec(), decision: inputs.decision.clone() },
        &mut journal,
    )?;

    resolve_conflict(store, conflicts, inputs.hits, &inputs.decision, now, lifecycle)?;
    log(
        JournalOp::ResolveConflict {
            hit_ids: inputs.hits.iter().map(|h| h.id).collect(),
            decision: inputs.decision.clone(),
        },
        &mut journal,
    )?;

    let decision_relevant = inputs.decision.confidence >= lifecycle.conflict_confidence;
    let consolidated = if inputs.skip_consolidation {
        None
    } else {
        let out = store.consolidate(
            inputs.stm_affect,
            inputs.stm_anchor,
            inputs.stm_salience,
            now,
            consolidation,
            decision_relevant,
        );
        log(
            JournalOp::Consolidate {
                affect: inputs.stm_affect.clone(),
                anchor: inputs.stm_anchor.clone(),
                salience: inputs.stm_salience,
                decision_relevant,
            },
            &mut journal,
        )?;
        out
    };

    decay(store, now, lifecycle);
    log(JournalOp::Decay, &mut journal)?;

    merge_pass(store, lifecycle);
    log(JournalOp::MergePass, &mut journal)?;

    Ok(consolidated)
}

/// Replay a journal over an empty store. The journal's `init` line supplies
/// the configs; ops are applied in order.
pub fn replay_journal(text: &str) -> Result<(LtmStore, ConflictState)> {
    let mut store = LtmStore::new();
    let mut conflicts = ConflictState::new();
    let mut consolidation = ConsolidationConfig::default();
    let mut lifecycle = LifecycleConfig::default();
    for (line, op) in read_journal(text)? {
        match op {
            JournalOp::Init { consolidation: c, lifecycle_json } => {
                consolidation = c;
                if !lifecycle_json.is_null() {
                    lifecycle = serde_json::from_value(lifecycle_json)?;
                }
            }
            JournalOp::MarkActivated { ids } => {
                let hits: Vec<ScoredHit> = ids.iter().map(|&id| ScoredHit { id, score: 0.0 }).collect();
                mark_activated(&mut store, &hits, line.turn)?;
            }
            JournalOp::Reinforce { hits, decision } => {
                reinforce(&mut store, &hits, &decision, &lifecycle)?;
            }
            JournalOp::ResolveConflict { hit_ids, decision } => {
                // Scores are irrelevant to conflict resolution.
                let hits: Vec<ScoredHit> =
                    hit_ids.iter().map(|&id| ScoredHit { id, score: 0.0 }).collect();
                resolve_conflict(&mut store, &mut conflicts, &hits, &decision, line.turn, &lifecycle)?;
            }
            JournalOp::Consolidate { affect, anchor, salience, decision_relevant } => {
                store.consolidate(&affect, &anchor, salience, line.turn, &consolidation, decision_relevant);
            }
            JournalOp::Decay => decay(&mut store, line.turn, &lifecycle),
            JournalOp::MergePass => merge_pass(&mut store, &lifecycle),
        }
    }
    Ok((store, conflicts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn anchor_dir(dir: usize) -> ContextAnchor {
        let mut v = vec![0.0; 16];
        v[dir] = 1.0;
        ContextAnchor::new(v, BTreeSet::new()).unwrap()
    }

    fn record(id: u64, v: f64, salience: f64, strength: f64) -> LtmRecord {
        LtmRecord {
            id,
            affect: AffectState::new(v, 0.2, vec![0.25; 4]),
            anchor: anchor_dir(0),
            salience,
            strength,
            activation_count: 1,
            created_at: 0,
            last_updated: 0,
            last_activated: 0,
        }
    }

    fn store_of(records: Vec<LtmRecord>) -> LtmStore {
        let next_id = records.iter().map(|r| r.id + 1).max().unwrap_or(0);
        LtmStore { records, next_id, recent_anchor_counts: Vec::new() }
    }

    fn signal(v: f64, confidence: f64) -> DecisionSignal {
        DecisionSignal { affect: AffectState::new(v, 0.0, vec![0.25; 4]), confidence }
    }

    #[test]
    fn decay_matches_closed_form() {
        let mut store = store_of(vec![record(0, 0.3, 0.0, 1.0)]);
        let cfg = LifecycleConfig { decay_eta: 0.1, ..Default::default() };
        decay(&mut store, 10, &cfg);
        let expect = (-1.0f64).exp();
        assert!((store.get(0).unwrap().strength - expect).abs() < 1e-9);
        assert_eq!(store.get(0).unwrap().last_updated, 10);
    }

    #[test]
    fn decay_zero_elapsed_is_identity() {
        let mut store = store_of(vec![record(0, 0.3, 0.5, 1.0)]);
        let before = store.clone();
        decay(&mut store, 0, &LifecycleConfig::default());
        assert_eq!(store, before);
    }

    #[test]
    fn decay_prunes_below_floor() {
        let mut store = store_of(vec![record(0, 0.3, 0.0, 0.011)]);
        let cfg = LifecycleConfig { decay_eta: 0.1, ..Default::default() };
        decay(&mut store, 10, &cfg);
        assert!(store.is_empty());
    }

    #[test]
    fn higher_salience_decays_slower() {
        let mut store = store_of(vec![record(0, 0.3, 0.0, 1.0), record(1, 0.3, 1.0, 1.0)]);
        decay(&mut store, 20, &LifecycleConfig::default());
        assert!(store.get(1).unwrap().strength > store.get(0).unwrap().strength);
    }

    #[test]
    fn reinforce_agreeing_hit() {
        let mut store = store_of(vec![record(0, 0.5, 0.5, 1.0)]);
        reinforce(
            &mut store,
            &[ScoredHit { id: 0, score: 0.8 }],
            &signal(0.4, 0.9),
            &LifecycleConfig::default(),
        )
        .unwrap();
        assert!((store.get(0).unwrap().strength - 1.5).abs() < 1e-12);
    }

    #[test]
    fn reinforce_caps_at_strength_cap() {
        let mut store = store_of(vec![record(0, 0.5, 0.5, 9.8)]);
        reinforce(
            &mut store,
            &[ScoredHit { id: 0, score: 1.0 }],
            &signal(0.4, 0.9),
            &LifecycleConfig::default(),
        )
        .unwrap();
        assert_eq!(store.get(0).unwrap().strength, STRENGTH_CAP);
    }

    #[test]
    fn reinforce_empty_hits_is_noop() {
        let mut store = store_of(vec![record(0, 0.5, 0.5, 1.0)]);
        let before = store.clone();
        reinforce(&mut store, &[], &signal(0.4, 0.9), &LifecycleConfig::default()).unwrap();
        assert_eq!(store, before);
    }

    #[test]
    fn merge_identical_pair() {
        let mut store = store_of(vec![record(0, 0.5, 0.4, 1.0), record(1, 0.5, 0.4, 1.0)]);
        merge_pass(&mut store, &LifecycleConfig::default());
        assert_eq!(store.len(), 1);
        let merged = store.get(0).unwrap();
        assert!((merged.strength - 2.0).abs() < 1e-12);
        assert_eq!(merged.activation_count, 2);
    }

    #[test]
    fn merge_skips_dissimilar_pairs() {
        let mut a = record(0, 0.5, 0.4, 1.0);
        a.anchor = anchor_dir(0);
        let mut b = record(1, 0.5, 0.4, 1.0);
        b.anchor = anchor_dir(5);
        let mut store = store_of(vec![a, b]);
        let before = store.clone();
        merge_pass(&mut store, &LifecycleConfig::default());
        assert_eq!(store, before);
    }

    #[test]
    fn merge_is_idempotent() {
        let mut store = store_of(vec![
            record(0, 0.50, 0.4, 1.0),
            record(1, 0.52, 0.4, 1.5),
            record(2, 0.48, 0.4, 0.8),
        ]);
        merge_pass(&mut store, &LifecycleConfig::default());
        let once = store.clone();
        merge_pass(&mut store, &LifecycleConfig::default());
        assert_eq!(store, once);
    }

    #[test]
    fn conflict_revises_after_streak() {
        let cfg = LifecycleConfig::default();
        let mut store = store_of(vec![record(0, -0.8, 0.5, 2.0)]);
        let mut conflicts = ConflictState::new();
        let hits = [ScoredHit { id: 0, score: 1.0 }];
        let dec = signal(0.6, 0.9);

        resolve_conflict(&mut store, &mut conflicts, &hits, &dec, 1, &cfg).unwrap();
        resolve_conflict(&mut store, &mut conflicts, &hits, &dec, 2, &cfg).unwrap();
        assert_eq!(conflicts.streaks.get(&0), Some(&2));
        assert!((store.get(0).unwrap().affect.valence + 0.8).abs() < 1e-12, "no revision yet");

        resolve_conflict(&mut store, &mut conflicts, &hits, &dec, 3, &cfg).unwrap();
        let expect = 0.7 * -0.8 + 0.3 * 0.6;
        assert!((store.get(0).unwrap().affect.valence - expect).abs() < 1e-12);
        assert!(conflicts.streaks.is_empty());
        assert_eq!(store.get(0).unwrap().last_updated, 3);
    }

    #[test]
    fn consistent_decision_resets_streaks() {
        let cfg = LifecycleConfig::default();
        let mut store = store_of(vec![record(0, -0.8, 0.5, 2.0)]);
        let mut conflicts = ConflictState::new();
        let hits = [ScoredHit { id: 0, score: 1.0 }];
        resolve_conflict(&mut store, &mut conflicts, &hits, &signal(0.6, 0.9), 1, &cfg).unwrap();
        assert_eq!(conflicts.streaks.get(&0), Some(&1));
        let before = store.clone();
        resolve_conflict(&mut store, &mut conflicts, &hits, &signal(-0.5, 0.9), 2, &cfg).unwrap();
        assert!(conflicts.streaks.is_empty());
        assert_eq!(store, before);
    }

    #[test]
    fn low_confidence_contradiction_does_not_count() {
        let cfg = LifecycleConfig::default();
        let mut store = store_of(vec![record(0, -0.8, 0.5, 2.0)]);
        let mut conflicts = ConflictState::new();
        let hits = [ScoredHit { id: 0, score: 1.0 }];
        resolve_conflict(&mut store, &mut conflicts, &hits, &signal(0.6, 0.3), 1, &cfg).unwrap();
        assert!(conflicts.streaks.is_empty());
    }

    #[test]
    fn journal_replay_equals_direct_execution() {
        // Five consolidations and two decays, journaled then replayed,
        // must equal the directly mutated store field-exactly.
        use crate::ltm::{JournalOp, LtmStore};

        let consolidation = ConsolidationConfig::default();
        let lifecycle = LifecycleConfig { decay_eta: 0.08, ..Default::default() };

        let mut direct = LtmStore::new();
        let mut journal = String::new();
        let push_line = |op: &JournalOp, turn: u64, journal: &mut String| {
            journal.push_str(&serde_json::to_string(&op.to_line(turn)).unwrap());
            journal.push('\n');
        };
        push_line(
            &JournalOp::Init {
                consolidation: consolidation.clone(),
                lifecycle_json: serde_json::to_value(&lifecycle).unwrap(),
            },
            0,
            &mut journal,
        );

        for i in 0..5u64 {
            let affect = AffectState::new(0.2 + 0.1 * i as f64, 0.3, vec![0.4, 0.2, 0.2, 0.2]);
            let anchor = anchor_dir(i as usize);
            let salience = 0.7 + 0.05 * i as f64;
            direct.consolidate(&affect, &anchor, salience, i, &consolidation, false);
            push_line(
                &JournalOp::Consolidate { affect, anchor, salience, decision_relevant: false },
                i,
                &mut journal,
            );
        }
        for &turn in &[12u64, 20] {
            decay(&mut direct, turn, &lifecycle);
            push_line(&JournalOp::Decay, turn, &mut journal);
        }

        let (replayed, _) = replay_journal(&journal).unwrap();
        assert_eq!(replayed, direct);
    }

    #[test]
    fn update_runs_all_gates_closed() {
        let mut store = LtmStore::new();
        let mut conflicts = ConflictState::new();
        let stm = AffectState::new(0.05, 0.0, vec![0.25; 4]);
        let anchor = anchor_dir(1);
        let out = update(
            &mut store,
            &mut conflicts,
            UpdateInputs {
                hits: &[],
                decision: signal(0.05, 0.2),
                stm_affect: &stm,
                stm_anchor: &anchor,
                stm_salience: 0.1,
                now: 1,
                skip_consolidation: false,
            },
            &ConsolidationConfig::default(),
            &LifecycleConfig::default(),
            None,
        )
        .unwrap();
        assert!(out.is_none());
        assert!(store.is_empty());
    }

    #[test]
    fn update_consolidates_high_salience() {
        let mut store = LtmStore::new();
        let mut conflicts = ConflictState::new();
        let stm = AffectState::new(0.8, 0.5, vec![0.7, 0.1, 0.1, 0.1]);
        let anchor = anchor_dir(1);
        let out = update(
            &mut store,
            &mut conflicts,
            UpdateInputs {
                hits: &[],
                decision: signal(0.8, 0.2),
                stm_affect: &stm,
                stm_anchor: &anchor,
                stm_salience: 0.9,
                now: 1,
                skip_consolidation: false,
            },
            &ConsolidationConfig::default(),
            &LifecycleConfig::default(),
            None,
        )
        .unwrap();
        assert!(out.is_some());
        assert_eq!(store.len(), 1);
    }
}
