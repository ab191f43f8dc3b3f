//! Deterministic synthetic encoder: raw per-turn observations in, Emotion
//! Memory Units out.
//!
//! Real deployments would plug LLM/speech/vision encoders in behind the same
//! contract; here each present channel is decoded through a fixed seeded
//! linear projection so the whole pipeline is reproducible and testable.
//!
//! Signal convention: an 8-dim vector laid out as
//! `[valence, arousal, cat_0 .. cat_{L-1}, padding...]`. Seed 0 selects the
//! identity read-out of that layout; any other seed applies a seeded signed
//! permutation of the input dimensions first, which yields a genuinely
//! different (but still fixed and linear) projection.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::affect::{
    neutral_affect, weighted_blend_affect, AffectState, ContextAnchor, EmotionMemoryUnit,
    ModalityEvidence, ModalityKind,
};
use crate::error::{Error, Result};
use crate::rng::{hash_str, Rng};

/// Fixed raw-signal dimensionality for all three channels.
pub const SIGNAL_DIM: usize = 8;

/// One raw multimodal observation for a single turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawObservation {
    pub turn: u64,
    pub text_signal: Option<Vec<f64>>,
    pub audio_signal: Option<Vec<f64>>,
    pub vision_signal: Option<Vec<f64>>,
    pub context_tokens: BTreeSet<String>,
    /// Declared noise level per channel, indexed [text, audio, vision].
    pub noise_level: [f64; 3],
}

impl RawObservation {
    pub fn signal_for(&self, kind: ModalityKind) -> Option<&Vec<f64>> {
        match kind {
            ModalityKind::Text => self.text_signal.as_ref(),
            ModalityKind::Audio => self.audio_signal.as_ref(),
            ModalityKind::Vision => self.vision_signal.as_ref(),
        }
    }
}

/// Encoder settings: one projection seed per modality plus the salience gain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderConfig {
    #[serde(default)]
    pub text_seed: u64,
    #[serde(default)]
    pub audio_seed: u64,
    #[serde(default)]
    pub vision_seed: u64,
    #[serde(default = "default_salience_gain")]
    pub salience_gain: f64,
}

fn default_salience_gain() -> f64 {
    1.0
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig { text_seed: 0, audio_seed: 0, vision_seed: 0, salience_gain: 1.0 }
    }
}

impl EncoderConfig {
    pub fn seed_for(&self, kind: ModalityKind) -> u64 {
        match kind {
            ModalityKind::Text => self.text_seed,
            ModalityKind::Audio => self.audio_seed,
            ModalityKind::Vision => self.vision_seed,
        }
    }
}

/// Declared reliability of one channel: 0 when absent, else 1 - noise.
pub fn reliability_of(obs: &RawObservation, kind: ModalityKind) -> f64 {
    if obs.signal_for(kind).is_none() {
        0.0
    } else {
        (1.0 - obs.noise_level[kind.index()]).clamp(0.0, 1.0)
    }
}

/// A (2 + L) x SIGNAL_DIM read-out matrix.
#[derive(Debug, Clone)]
struct Projection {
    rows: Vec<Vec<f64>>,
}

impl Projection {
    fn seeded(seed: u64, label_count: usize) -> Self {
        // Signed permutation of the input dimensions; seed 0 is the identity.
        let mut perm: Vec<usize> = (0..SIGNAL_DIM).collect();
        let mut sign = vec![1.0; SIGNAL_DIM];
        if seed != 0 {
            let mut rng = Rng::derive(seed, &[0x70726f6a]);
            for i in (1..SIGNAL_DIM).rev() {
                let j = rng.next_below(i as u64 + 1) as usize;
                perm.swap(i, j);
            }
            for s in &mut sign {
                if rng.next_u64() & 1 == 1 {
                    *s = -1.0;
                }
            }
        }
        let rows = (0..2 + label_count)
            .map(|r| {
                let mut row = vec![0.0; SIGNAL_DIM];
                if r < SIGNAL_DIM {
                    row[perm[r]] = sign[r];
                }
                row
            })
            .collect();
        Projection { rows }
    }

    fn apply(&self, signal: &[f64], label_count: usize) -> AffectState {
        let read = |row: &Vec<f64>| -> f64 {
            row.iter().zip(signal).map(|(w, x)| w * x).sum()
        };
        let valence = read(&self.rows[0]);
        let arousal = read(&self.rows[1]);
        let cat: Vec<f64> = (0..label_count).map(|i| read(&self.rows[2 + i]).max(0.0)).collect();
        AffectState::new(valence, arousal, cat)
    }
}

/// Stateless synthetic encoder with precomputed projections.
#[derive(Debug, Clone)]
pub struct Encoder {
    cfg: EncoderConfig,
    label_count: usize,
    anchor_dim: usize,
    projections: [Projection; 3],
    anchor_seed: u64,
}

impl Encoder {
    pub fn new(cfg: EncoderConfig, label_count: usize, anchor_dim: usize) -> Result<Self> {
        if cfg.salience_gain <= 0.0 || !cfg.salience_gain.is_finite() {
            return Err(Error::Config(format!(
                "salience_gain must be positive, got {}",
                cfg.salience_gain
            )));
        }
        if label_count == 0 {
            return Err(Error::Config("label count must be at least 1".into()));
        }
        if anchor_dim == 0 {
            return Err(Error::Config("anchor dimension must be at least 1".into()));
        }
        let projections = [
            Projection::seeded(cfg.text_seed, label_count),
            Projection::seeded(cfg.audio_seed, label_count),
            Projection::seeded(cfg.vision_seed, label_count),
        ];
        // The anchor hash stream is pinned by the modality seeds so one
        // config fully determines the encoder.
        let anchor_seed = cfg.text_seed
            ^ cfg.audio_seed.rotate_left(21)
            ^ cfg.vision_seed.rotate_left(42)
            ^ 0x616e_6368;
        Ok(Encoder { cfg, label_count, anchor_dim, projections, anchor_seed })
    }

    pub fn config(&self) -> &EncoderConfig {
        &self.cfg
    }

    pub fn label_count(&self) -> usize {
        self.label_count
    }

    /// Deterministic unit vector for one token.
    fn token_vector(&self, token: &str) -> Vec<f64> {
        let mut rng = Rng::derive(self.anchor_seed, &[hash_str(token)]);
        loop {
            let v: Vec<f64> = (0..self.anchor_dim).map(|_| rng.next_gaussian()).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-9 {
                return v.into_iter().map(|x| x / norm).collect();
            }
        }
    }

    /// Anchor from the token set; an empty set maps to a fixed
    /// "contextless" anchor.
    pub fn anchor_from_tokens(&self, tokens: &BTreeSet<String>) -> ContextAnchor {
        let mut sum = vec![0.0; self.anchor_dim];
        for token in tokens {
            for (acc, x) in sum.iter_mut().zip(self.token_vector(token)) {
                *acc += x;
            }
        }
        let norm = sum.iter().map(|x| x * x).sum::<f64>().sqrt();
        if tokens.is_empty() || norm <= 1e-9 {
            sum = self.token_vector("");
        }
        ContextAnchor::new(sum, tokens.clone()).expect("anchor construction cannot degenerate")
    }

    /// Decode one observation into an EMU.
    ///
    /// Per-channel affect comes from the seeded projection; the EMU affect is
    /// the reliability-weighted blend of present channels (neutral when no
    /// present channel carries reliability); salience is the clamped affect
    /// magnitude scaled by `salience_gain`.
    pub fn encode(&self, obs: &RawObservation) -> Result<EmotionMemoryUnit> {
        let any_present = ModalityKind::ALL.iter().any(|&k| obs.signal_for(k).is_some());
        if !any_present && obs.context_tokens.is_empty() {
            return Err(Error::EncodingDegenerate);
        }

        let mut evidence = Vec::with_capacity(3);
        for &kind in &ModalityKind::ALL {
            match obs.signal_for(kind) {
                Some(signal) => {
                    if signal.len() != SIGNAL_DIM {
                        return Err(Error::Domain(format!(
                            "{kind:?} signal has length {}, expected {SIGNAL_DIM}",
                            signal.len()
                        )));
                    }
                    let affect = self.projections[kind.index()].apply(signal, self.label_count);
                    evidence.push(ModalityEvidence::present(kind, affect, reliability_of(obs, kind)));
                }
                None => evidence.push(ModalityEvidence::absent(kind, self.label_count)),
            }
        }

        let weighted: Vec<(&AffectState, f64)> = evidence
            .iter()
            .filter(|e| e.present && e.reliability > 0.0)
            .map(|e| (&e.affect, e.reliability))
            .collect();
        let affect = if weighted.is_empty() {
            neutral_affect(self.label_count)
        } else {
            weighted_blend_affect(&weighted)
        };

        let salience = (self.cfg.salience_gain * (affect.valence.abs() + affect.arousal.abs()) / 2.0)
            .clamp(0.0, 1.0);
        let anchor = self.anchor_from_tokens(&obs.context_tokens);

        Ok(EmotionMemoryUnit { affect, evidence, anchor, salience, timestamp: obs.turn })
    }
}

/// Layout a target affect into the canonical signal vector the default
/// (seed 0) projection reads back. The scenario generator emits in this
/// layout; the last two dimensions are padding.
pub fn signal_from_affect(affect: &AffectState) -> Vec<f64> {
    let mut signal = vec![0.0; SIGNAL_DIM];
    signal[0] = affect.valence;
    signal[1] = affect.arousal;
    for (i, &c) in affect.categorical.iter().enumerate() {
        if 2 + i < SIGNAL_DIM {
            signal[2 + i] = c;
        }
    }
    signal
}
