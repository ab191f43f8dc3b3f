//! Memory-guided dynamic fusion and the decision layer.
//!
//! Each present modality is weighted by `r_i * (beta + (1 - beta) * s_i)`
//! where `r_i` is declared reliability and `s_i` is consistency with the
//! retrieved memory summary; weights are sharpened by the `softness`
//! exponent and normalized. The fused local affect is then blended with the
//! memory summary by `mu = mu_max * confidence * (1 - mean_reliability)`,
//! so memory matters most exactly when current evidence is weak.

use serde::{Deserialize, Serialize};

use crate::affect::{
    affect_similarity, blend_affect, neutral_affect, weighted_blend_affect, AffectState,
    EmotionLabel, LabelSet, ModalityEvidence,
};
use crate::ltm::DecisionSignal;
use crate::retrieval::RetrievalResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    /// Reliability-vs-consistency balance in the weight function; at 1 the
    /// weights depend on reliability alone.
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// Cap on the memory blend.
    #[serde(default = "default_mu_max")]
    pub mu_max: f64,
    /// Weight-sharpening exponent.
    #[serde(default = "default_softness")]
    pub softness: f64,
}

fn default_beta() -> f64 {
    0.5
}
fn default_mu_max() -> f64 {
    0.6
}
fn default_softness() -> f64 {
    4.0
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig { beta: 0.5, mu_max: 0.6, softness: 4.0 }
    }
}

impl FusionConfig {
    pub fn validate(&self) -> crate::error::Result<()> {
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(crate::error::Error::Config("beta must be in [0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.mu_max) {
            return Err(crate::error::Error::Config("mu_max must be in [0, 1]".into()));
        }
        if self.softness <= 0.0 || !self.softness.is_finite() {
            return Err(crate::error::Error::Config("softness must be positive".into()));
        }
        Ok(())
    }
}

/// Normalized modality weights plus the consistency terms and memory blend
/// behind them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionWeights {
    /// One weight per modality in [text, audio, vision] order; absent
    /// modalities get exactly 0.
    pub weights: [f64; 3],
    /// Memory-consistency terms s_i, same order.
    pub consistencies: [f64; 3],
    /// Memory blend in [0, mu_max].
    pub mu: f64,
}

/// The memory-calibrated representation handed to the decision layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusedRepresentation {
    pub affect: AffectState,
    pub weights: FusionWeights,
    pub retrieval_confidence: f64,
}

/// Final per-turn affective output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub label: EmotionLabel,
    pub categorical: Vec<f64>,
    pub valence: f64,
    pub arousal: f64,
    pub confidence: f64,
}

impl Decision {
    pub fn as_affect(&self) -> AffectState {
        AffectState::new(self.valence, self.arousal, self.categorical.clone())
    }

    pub fn signal(&self) -> DecisionSignal {
        DecisionSignal { affect: self.as_affect(), confidence: self.confidence }
    }
}

/// Consistency of one modality with the retrieved memory: cosine similarity
/// mapped to [0, 1]. With no retrieved memory (confidence 0) every modality
/// gets the neutral prior 0.5.
pub fn consistency(
    evidence: &ModalityEvidence,
    memory_summary: &AffectState,
    retrieval_confidence: f64,
) -> f64 {
    if retrieval_confidence == 0.0 {
        0.5
    } else {
        (affect_similarity(&evidence.affect, memory_summary) + 1.0) / 2.0
    }
}

/// Fuse current evidence with retrieved memory.
pub fn fuse(evidence: &[ModalityEvidence], retrieval: &RetrievalResult, cfg: &FusionConfig) -> FusedRepresentation {
    debug_assert_eq!(evidence.len(), 3, "one evidence entry per modality");
    let label_count = evidence
        .first()
        .map(|e| e.affect.label_count())
        .unwrap_or_else(|| retrieval.memory_summary.label_count());

    let mut consistencies = [0.5; 3];
    let mut raw = [0.0; 3];
    for (i, e) in evidence.iter().enumerate() {
        consistencies[i] = consistency(e, &retrieval.memory_summary, retrieval.confidence);
        if e.present {
            let base = e.reliability * (cfg.beta + (1.0 - cfg.beta) * consistencies[i]);
            raw[i] = base.powf(cfg.softness);
        }
    }

    let present: Vec<usize> = evidence
        .iter()
        .enumerate()
        .filter(|(_, e)| e.present)
        .map(|(i, _)| i)
        .collect();
    let total: f64 = raw.iter().sum();
    let mut weights = [0.0; 3];
    if !present.is_empty() {
        if total > 0.0 {
            for i in 0..3 {
                weights[i] = raw[i] / total;
            }
        } else {
            // All present channels carry zero raw weight (reliability 0):
            // fall back to an even split so the weights still sum to one.
            for &i in &present {
                weights[i] = 1.0 / present.len() as f64;
            }
        }
    }

    let local = if present.is_empty() {
        neutral_affect(label_count)
    } else {
        let items: Vec<(&AffectState, f64)> =
            present.iter().map(|&i| (&evidence[i].affect, weights[i])).collect();
        weighted_blend_affect(&items)
    };

    let mean_reliability: f64 = evidence.iter().map(|e| e.reliability).sum::<f64>() / 3.0;
    let mu = (cfg.mu_max * retrieval.confidence * (1.0 - mean_reliability)).clamp(0.0, cfg.mu_max);
    let affect = blend_affect(&local, &retrieval.memory_summary, mu).expect("mu is in [0, 1]");

    FusedRepresentation {
        affect,
        weights: FusionWeights { weights, consistencies, mu },
        retrieval_confidence: retrieval.confidence,
    }
}

/// Decision layer: argmax of the fused categorical (ties toward the lowest
/// index), confidence = the max entry.
pub fn decide(fused: &FusedRepresentation, labels: &LabelSet) -> Decision {
    let idx = fused.affect.argmax();
    let label = labels.get(idx).cloned().unwrap_or(EmotionLabel {
        index: idx,
        name: format!("label-{idx}"),
    });
    Decision {
        label,
        categorical: fused.affect.categorical.clone(),
        valence: fused.affect.valence,
        arousal: fused.affect.arousal,
        confidence: fused.affect.categorical[idx],
    }
}
