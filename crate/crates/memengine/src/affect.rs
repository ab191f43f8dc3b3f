//! Shared affect representations and the Emotion Memory Unit.
//!
//! Every other module operates on these types, so their invariants are
//! enforced at construction: categorical distributions are non-negative and
//! sum to one, valence/arousal live in [-1, 1], anchors are unit-norm.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One entry of a label set, e.g. `{index: 0, name: "anger"}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmotionLabel {
    pub index: usize,
    pub name: String,
}

/// Ordered, contiguous set of emotion labels. Fixed per engine instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSet {
    labels: Vec<EmotionLabel>,
}

impl LabelSet {
    pub fn from_names<S: Into<String>>(names: Vec<S>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::Config("label set must not be empty".into()));
        }
        let labels: Vec<EmotionLabel> = names
            .into_iter()
            .enumerate()
            .map(|(index, name)| EmotionLabel { index, name: name.into() })
            .collect();
        let mut seen = BTreeSet::new();
        for l in &labels {
            if !seen.insert(l.name.clone()) {
                return Err(Error::Config(format!("duplicate label name: {}", l.name)));
            }
        }
        Ok(LabelSet { labels })
    }

    /// The default four-class set: anger, sadness, neutral, joy.
    pub fn default_four() -> Self {
        LabelSet::from_names(vec!["anger", "sadness", "neutral", "joy"]).unwrap()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&EmotionLabel> {
        self.labels.get(index)
    }

    pub fn labels(&self) -> &[EmotionLabel] {
        &self.labels
    }
}

impl Default for LabelSet {
    fn default() -> Self {
        LabelSet::default_four()
    }
}

/// Continuous valence-arousal pair plus a categorical emotion distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffectState {
    pub valence: f64,
    pub arousal: f64,
    pub categorical: Vec<f64>,
}

impl AffectState {
    /// Build a valid state: valence/arousal clamped to [-1, 1], categorical
    /// entries floored at zero and renormalized (uniform if degenerate).
    pub fn new(valence: f64, arousal: f64, categorical: Vec<f64>) -> Self {
        debug_assert!(!categorical.is_empty(), "categorical must be non-empty");
        let mut cat: Vec<f64> = categorical
            .into_iter()
            .map(|c| if c.is_finite() && c > 0.0 { c } else { 0.0 })
            .collect();
        if cat.is_empty() {
            cat = vec![1.0];
        }
        let sum: f64 = cat.iter().sum();
        if sum > 0.0 {
            for c in &mut cat {
                *c /= sum;
            }
        } else {
            let u = 1.0 / cat.len() as f64;
            cat.iter_mut().for_each(|c| *c = u);
        }
        AffectState {
            valence: clamp_unit(valence),
            arousal: clamp_unit(arousal),
            categorical: cat,
        }
    }

    pub fn label_count(&self) -> usize {
        self.categorical.len()
    }

    /// Index of the largest categorical entry, ties broken toward the
    /// lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &c) in self.categorical.iter().enumerate() {
            if c > self.categorical[best] {
                best = i;
            }
        }
        best
    }

    /// The concatenation [valence, arousal, categorical...] used by
    /// similarity computations.
    fn concat(&self) -> impl Iterator<Item = f64> + '_ {
        [self.valence, self.arousal]
            .into_iter()
            .chain(self.categorical.iter().copied())
    }
}

fn clamp_unit(x: f64) -> f64 {
    if x.is_finite() {
        x.clamp(-1.0, 1.0)
    } else {
        0.0
    }
}

/// The neutral state: zero valence and arousal, uniform categorical.
pub fn neutral_affect(label_count: usize) -> AffectState {
    AffectState::new(0.0, 0.0, vec![1.0; label_count.max(1)])
}

/// Convex combination of two affect states. `w = 0` returns `a` exactly,
/// `w = 1` returns `b` exactly.
pub fn blend_affect(a: &AffectState, b: &AffectState, w: f64) -> Result<AffectState> {
    if !(0.0..=1.0).contains(&w) {
        return Err(Error::Domain(format!("blend weight {w} outside [0, 1]")));
    }
    if a.label_count() != b.label_count() {
        return Err(Error::Domain(format!(
            "categorical length mismatch: {} vs {}",
            a.label_count(),
            b.label_count()
        )));
    }
    if w == 0.0 {
        return Ok(a.clone());
    }
    if w == 1.0 {
        return Ok(b.clone());
    }
    let cat: Vec<f64> = a
        .categorical
        .iter()
        .zip(&b.categorical)
        .map(|(&x, &y)| (1.0 - w) * x + w * y)
        .collect();
    Ok(AffectState::new(
        (1.0 - w) * a.valence + w * b.valence,
        (1.0 - w) * a.arousal + w * b.arousal,
        cat,
    ))
}

/// Weighted blend of several affect states. Weights are normalized
/// internally; a degenerate weight mass yields the neutral state.
pub fn weighted_blend_affect(items: &[(&AffectState, f64)]) -> AffectState {
    let label_count = items.first().map(|(a, _)| a.label_count()).unwrap_or(1);
    let total: f64 = items.iter().map(|(_, w)| w.max(0.0)).sum();
    if items.is_empty() || total <= 0.0 {
        return neutral_affect(label_count);
    }
    let mut valence = 0.0;
    let mut arousal = 0.0;
    let mut cat = vec![0.0; label_count];
    for (a, w) in items {
        let w = w.max(0.0) / total;
        valence += w * a.valence;
        arousal += w * a.arousal;
        for (acc, &c) in cat.iter_mut().zip(&a.categorical) {
            *acc += w * c;
        }
    }
    AffectState::new(valence, arousal, cat)
}

/// Cosine similarity over the concatenated [valence, arousal, categorical]
/// vectors. Returns 0 when either vector has zero norm, and is clamped to
/// [-1, 1].
pub fn affect_similarity(a: &AffectState, b: &AffectState) -> f64 {
    if a.label_count() != b.label_count() {
        return 0.0;
    }
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.concat().zip(b.concat()) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na <= 0.0 || nb <= 0.0 {
        return 0.0;
    }
    (dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0)
}

/// The three input channels, iterated in this fixed order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModalityKind {
    Text,
    Audio,
    Vision,
}

impl ModalityKind {
    pub const ALL: [ModalityKind; 3] = [ModalityKind::Text, ModalityKind::Audio, ModalityKind::Vision];

    pub fn index(self) -> usize {
        match self {
            ModalityKind::Text => 0,
            ModalityKind::Audio => 1,
            ModalityKind::Vision => 2,
        }
    }
}

/// Per-modality affect estimate with its source reliability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalityEvidence {
    pub kind: ModalityKind,
    pub affect: AffectState,
    pub reliability: f64,
    pub present: bool,
}

impl ModalityEvidence {
    pub fn present(kind: ModalityKind, affect: AffectState, reliability: f64) -> Self {
        ModalityEvidence {
            kind,
            affect,
            reliability: reliability.clamp(0.0, 1.0),
            present: true,
        }
    }

    /// Absent channels carry zero reliability and the neutral state.
    pub fn absent(kind: ModalityKind, label_count: usize) -> Self {
        ModalityEvidence {
            kind,
            affect: neutral_affect(label_count),
            reliability: 0.0,
            present: false,
        }
    }
}

/// Unit-norm context embedding plus the tags it was derived from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextAnchor {
    pub embedding: Vec<f64>,
    pub tags: BTreeSet<String>,
}

impl ContextAnchor {
    /// Normalizes the embedding to unit norm; the all-zeros (or non-finite)
    /// vector is rejected.
    pub fn new(embedding: Vec<f64>, tags: BTreeSet<String>) -> Result<Self> {
        if embedding.is_empty() {
            return Err(Error::Domain("anchor embedding must be non-empty".into()));
        }
        let norm = embedding.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || norm <= 0.0 {
            return Err(Error::Domain("anchor embedding must have positive finite norm".into()));
        }
        Ok(ContextAnchor {
            embedding: embedding.into_iter().map(|x| x / norm).collect(),
            tags,
        })
    }

    pub fn dim(&self) -> usize {
        self.embedding.len()
    }

    /// Cosine similarity between two anchors (0 on dimension mismatch).
    pub fn cosine(&self, other: &ContextAnchor) -> f64 {
        if self.dim() != other.dim() {
            return 0.0;
        }
        let dot: f64 = self.embedding.iter().zip(&other.embedding).map(|(a, b)| a * b).sum();
        dot.clamp(-1.0, 1.0)
    }
}

/// The per-turn structured memory object: affect, per-modality evidence,
/// context anchor, salience, and a monotone turn timestamp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmotionMemoryUnit {
    pub affect: AffectState,
    pub evidence: Vec<ModalityEvidence>,
    pub anchor: ContextAnchor,
    pub salience: f64,
    pub timestamp: u64,
}

impl EmotionMemoryUnit {
    pub fn evidence_for(&self, kind: ModalityKind) -> &ModalityEvidence {
        &self.evidence[kind.index()]
    }

    /// Mean reliability over present modalities; 0 when none are present.
    pub fn mean_present_reliability(&self) -> f64 {
        let present: Vec<f64> = self
            .evidence
            .iter()
            .filter(|e| e.present)
            .map(|e| e.reliability)
            .collect();
        if present.is_empty() {
            0.0
        } else {
            present.iter().sum::<f64>() / present.len() as f64
        }
    }
}
