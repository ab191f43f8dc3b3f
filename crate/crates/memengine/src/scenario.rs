//! Synthetic long-horizon interaction scenarios with latent ground-truth
//! affect, plus the two thin comparison baselines.
//!
//! The latent (valence, arousal) pair evolves as an AR(1) process around a
//! per-regime target; regime switches arrive at `event_rate`. Suppressed
//! turns replace the *text* emission with a near-neutral signal while the
//! latent is unchanged. With the default channel noise those turns carry
//! almost no local evidence and are classifiable above chance only through
//! history.
//!
//! Random state is split into three independent streams per dialogue
//! (latent/suppression, emission noise, masking) so corpora generated from
//! the same seed under different modality conditions share their latent
//! trajectories turn for turn.

use std::collections::{BTreeSet, VecDeque};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::affect::{
    weighted_blend_affect, AffectState, EmotionLabel, LabelSet, ModalityKind,
};
use crate::encoder::{signal_from_affect, Encoder, RawObservation, SIGNAL_DIM};
use crate::error::{Error, Result};
use crate::fusion::{decide, fuse, Decision, FusionConfig};
use crate::retrieval::RetrievalResult;
use crate::rng::Rng;

/// Input degradation regimes for robustness sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModalityCondition {
    /// All three channels present at their base noise.
    Complete,
    /// One uniformly chosen channel absent per turn.
    MissingOne,
    /// Extra noise added to every channel.
    LowQuality,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub n_dialogues: u64,
    #[serde(default = "default_turns")]
    pub turns_per_dialogue: u64,
    #[serde(default)]
    pub seed: u64,
    /// AR(1) persistence of the latent affect.
    #[serde(default = "default_drift_phi")]
    pub drift_phi: f64,
    /// Per-turn probability of an escalation/relief regime switch.
    #[serde(default = "default_event_rate")]
    pub event_rate: f64,
    /// Per-turn probability that the text channel masks the latent affect.
    #[serde(default = "default_suppression_rate")]
    pub suppression_rate: f64,
    #[serde(default = "default_condition")]
    pub modality_condition: ModalityCondition,
    /// Extra noise applied to all channels under `LowQuality`.
    #[serde(default = "default_noise_sigma")]
    pub noise_sigma: f64,
    /// Base noise per channel, indexed [text, audio, vision]. Text is the
    /// reliable narrow channel; audio and vision are broad but noisy.
    #[serde(default = "default_base_noise")]
    pub base_noise: [f64; 3],
    /// Fine-grained shape parameters; the defaults are the benchmark ones.
    #[serde(default)]
    pub texture: ScenarioTexture,
}

/// Secondary shape knobs of the generator. Everything here has a sensible
/// default and only robustness experiments normally touch them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioTexture {
    /// Markov persistence of suppression: probability a suppressed turn
    /// stays suppressed. Values at or below the suppression rate reduce to
    /// independent per-turn coin flips.
    #[serde(default = "default_suppression_stay")]
    pub suppression_stay: f64,
    /// Probability a regime switch revisits an earlier scene.
    #[serde(default = "default_scene_return_rate")]
    pub scene_return_rate: f64,
    /// Categorical mass the suppressed text emission puts on "neutral".
    #[serde(default = "default_suppressed_neutral_mass")]
    pub suppressed_neutral_mass: f64,
    /// Scales the anger-ward drift of noisy audio.
    #[serde(default = "default_audio_bias_scale")]
    pub audio_bias_scale: f64,
    /// Peak categorical mass deep inside a label zone.
    #[serde(default = "default_latent_peak")]
    pub latent_peak: f64,
    /// Peak categorical mass at a label boundary; above 0.5 the argmax is
    /// guaranteed to agree with `quantize`.
    #[serde(default = "default_latent_peak_floor")]
    pub latent_peak_floor: f64,
}

fn default_suppression_stay() -> f64 {
    0.0
}
fn default_scene_return_rate() -> f64 {
    0.5
}
fn default_suppressed_neutral_mass() -> f64 {
    0.33
}
fn default_audio_bias_scale() -> f64 {
    1.0
}
fn default_latent_peak() -> f64 {
    0.68
}
fn default_latent_peak_floor() -> f64 {
    0.52
}

impl Default for ScenarioTexture {
    fn default() -> Self {
        ScenarioTexture {
            suppression_stay: default_suppression_stay(),
            scene_return_rate: default_scene_return_rate(),
            suppressed_neutral_mass: default_suppressed_neutral_mass(),
            audio_bias_scale: default_audio_bias_scale(),
            latent_peak: default_latent_peak(),
            latent_peak_floor: default_latent_peak_floor(),
        }
    }
}

fn default_turns() -> u64 {
    40
}
fn default_drift_phi() -> f64 {
    0.9
}
fn default_event_rate() -> f64 {
    0.08
}
fn default_suppression_rate() -> f64 {
    0.15
}
fn default_condition() -> ModalityCondition {
    ModalityCondition::Complete
}
fn default_noise_sigma() -> f64 {
    0.25
}
fn default_base_noise() -> [f64; 3] {
    [0.05, 0.8, 0.95]
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            n_dialogues: 1,
            turns_per_dialogue: 40,
            seed: 0,
            drift_phi: 0.9,
            event_rate: 0.08,
            suppression_rate: 0.15,
            modality_condition: ModalityCondition::Complete,
            noise_sigma: 0.25,
            base_noise: default_base_noise(),
            texture: ScenarioTexture::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_dialogues < 1 || self.turns_per_dialogue < 1 {
            return Err(Error::Config("n_dialogues and turns_per_dialogue must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.drift_phi) {
            return Err(Error::Config("drift_phi must be in [0, 1)".into()));
        }
        for (name, p) in [("event_rate", self.event_rate), ("suppression_rate", self.suppression_rate)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("{name} must be in [0, 1]")));
            }
        }
        if self.noise_sigma < 0.0 {
            return Err(Error::Config("noise_sigma must be non-negative".into()));
        }
        for n in self.base_noise {
            if !(0.0..=1.0).contains(&n) {
                return Err(Error::Config("base_noise entries must be in [0, 1]".into()));
            }
        }
        let t = &self.texture;
        for (name, p) in [
            ("suppression_stay", t.suppression_stay),
            ("scene_return_rate", t.scene_return_rate),
            ("suppressed_neutral_mass", t.suppressed_neutral_mass),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("texture.{name} must be in [0, 1]")));
            }
        }
        if !(t.latent_peak_floor > 0.5 && t.latent_peak >= t.latent_peak_floor && t.latent_peak <= 1.0) {
            return Err(Error::Config(
                "texture peaks must satisfy 0.5 < latent_peak_floor <= latent_peak <= 1".into(),
            ));
        }
        if t.audio_bias_scale < 0.0 {
            return Err(Error::Config("texture.audio_bias_scale must be non-negative".into()));
        }
        Ok(())
    }
}

/// One simulated interaction step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub dialogue: u64,
    pub turn: u64,
    pub latent: AffectState,
    pub true_label: EmotionLabel,
    pub obs: RawObservation,
    pub suppressed: bool,
}

/// Label indices in the default four-class set.
pub const ANGER: usize = 0;
pub const SADNESS: usize = 1;
pub const NEUTRAL: usize = 2;
pub const JOY: usize = 3;

/// Discretize a latent point: joy above valence 0.2, anger/sadness below
/// -0.2 split by arousal sign, neutral in between. Boundary points fall to
/// the neutral (or sadness) side via the strict inequalities.
pub fn quantize(valence: f64, arousal: f64) -> usize {
    if valence > 0.2 {
        JOY
    } else if valence < -0.2 {
        if arousal > 0.0 {
            ANGER
        } else {
            SADNESS
        }
    } else {
        NEUTRAL
    }
}

/// Distance from a boundary at which the peak saturates.
const LATENT_MARGIN_SCALE: f64 = 0.3;
/// Temperature of the soft remainder split between competitor labels.
const LATENT_SOFT_TEMP: f64 = 0.35;

/// Zone prototypes used to split the non-peak categorical mass between
/// competitor labels.
const LABEL_PROTOTYPES: [(f64, f64); 4] = [
    (-0.55, 0.45), // anger
    (-0.50, -0.40), // sadness
    (0.0, 0.0),    // neutral
    (0.55, 0.30),  // joy
];

/// Distance of a point from the nearest boundary of its own label zone.
fn zone_margin(label: usize, v: f64, a: f64) -> f64 {
    match label {
        JOY => v - 0.2,
        NEUTRAL => 0.2 - v.abs(),
        ANGER => (-0.2 - v).min(a),
        SADNESS => (-0.2 - v).min(-a),
        _ => 0.0,
    }
    .max(0.0)
}

/// Latent affect at a point under a given texture. The categorical peaks on
/// the quantized label; the peak grows with distance from the zone
/// boundary, and the remaining mass splits between competitors by prototype
/// proximity. Points near a boundary therefore read as genuinely mixed
/// while the argmax still equals `quantize(v, a)`.
pub fn latent_affect_with(valence: f64, arousal: f64, texture: &ScenarioTexture) -> AffectState {
    let label = quantize(valence, arousal);
    let margin = zone_margin(label, valence, arousal);
    let peak = texture.latent_peak_floor
        + (texture.latent_peak - texture.latent_peak_floor) * (margin / LATENT_MARGIN_SCALE).min(1.0);

    let mut soft = [0.0f64; 4];
    let mut soft_total = 0.0;
    for (k, (pv, pa)) in LABEL_PROTOTYPES.iter().enumerate() {
        if k != label {
            let d = ((valence - pv).powi(2) + (arousal - pa).powi(2)).sqrt();
            soft[k] = (-d / LATENT_SOFT_TEMP).exp();
            soft_total += soft[k];
        }
    }
    let mut cat = vec![0.0; 4];
    cat[label] = peak;
    for k in 0..4 {
        if k != label {
            cat[k] = (1.0 - peak) * soft[k] / soft_total;
        }
    }
    AffectState::new(valence, arousal, cat)
}

/// [`latent_affect_with`] under the default texture.
pub fn latent_affect(valence: f64, arousal: f64) -> AffectState {
    latent_affect_with(valence, arousal, &ScenarioTexture::default())
}

/// The near-neutral text emission of a suppressed turn: flat valence and a
/// weak neutral-leaning categorical. Locally it still reads as "neutral",
/// just without conviction.
pub fn suppressed_text_affect_with(texture: &ScenarioTexture) -> AffectState {
    let mass = texture.suppressed_neutral_mass;
    let mut cat = vec![(1.0 - mass) / 3.0; 4];
    cat[NEUTRAL] = mass;
    AffectState::new(0.0, 0.0, cat)
}

/// [`suppressed_text_affect_with`] under the default texture.
pub fn suppressed_text_affect() -> AffectState {
    suppressed_text_affect_with(&ScenarioTexture::default())
}

/// Affect-zone targets the regime process moves between.
const REGIME_TARGETS: [(f64, f64); 6] = [
    (-0.62, 0.55),  // hostile
    (-0.55, -0.45), // dejected
    (0.02, 0.05),   // flat
    (0.60, 0.35),   // upbeat
    (0.38, -0.15),  // relieved
    (-0.38, -0.35), // gloomy
];

/// Acoustic artifacts do not read as neutral: spiky energy and unstable
/// pitch decode toward anger/agitation. The audio emission drifts along
/// this signal-space direction in proportion to its noise level.
const AUDIO_NOISE_BIAS: [f64; SIGNAL_DIM] = [-0.3, 0.4, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0];

/// Emit one channel's raw signal: layout the content affect, add gaussian
/// noise at `noise`, and (audio only) the noise-proportional anger drift.
pub fn emit_signal(
    content: &AffectState,
    kind: ModalityKind,
    noise: f64,
    bias_scale: f64,
    rng: &mut Rng,
) -> Vec<f64> {
    let mut signal = signal_from_affect(content);
    for (d, s) in signal.iter_mut().enumerate().take(SIGNAL_DIM) {
        *s += noise * rng.next_gaussian();
        if kind == ModalityKind::Audio {
            *s += noise * bias_scale * AUDIO_NOISE_BIAS[d];
        }
    }
    signal
}

fn clamp_unit(x: f64) -> f64 {
    x.clamp(-1.0, 1.0)
}

/// Generate all turns of one dialogue.
///
/// A dialogue moves between *scenes*, each pinned to one affect-zone
/// target. A regime switch either opens a fresh scene or returns to an
/// earlier one (keeping its id and target), so the same context token can
/// reappear many turns later carrying the same affective meaning.
pub fn generate_dialogue(cfg: &ScenarioConfig, dialogue: u64) -> Vec<Turn> {
    let mut state_rng = Rng::derive(cfg.seed, &[0x1a7e, dialogue]);
    let mut noise_rng = Rng::derive(cfg.seed, &[0x304e, dialogue]);
    let mut mask_rng = Rng::derive(cfg.seed, &[0x3a5c, dialogue]);

    // Scenes visited so far (palette index per scene id).
    let mut scenes: Vec<usize> = vec![state_rng.next_below(REGIME_TARGETS.len() as u64) as usize];
    let mut current: usize = 0;
    let (mut target_v, mut target_a) = REGIME_TARGETS[scenes[current]];
    let mut v = clamp_unit(target_v + 0.1 * state_rng.next_gaussian());
    let mut a = clamp_unit(target_a + 0.1 * state_rng.next_gaussian());

    // Markov suppression whose stationary rate equals the configured
    // suppression_rate exactly.
    let pi = cfg.suppression_rate;
    let stay = cfg.texture.suppression_stay.max(pi);
    let enter = if pi >= 1.0 { 1.0 } else { pi * (1.0 - stay) / (1.0 - pi) };
    let mut was_suppressed = false;

    let mut turns = Vec::with_capacity(cfg.turns_per_dialogue as usize);
    for t in 0..cfg.turns_per_dialogue {
        if t > 0 {
            if state_rng.next_f64() < cfg.event_rate {
                let return_possible = scenes.len() > 1;
                if return_possible && state_rng.next_f64() < cfg.texture.scene_return_rate {
                    // Revisit the most affectively contrasting earlier scene
                    // (escalation/relief whiplash; ties toward the oldest).
                    let cur_v = REGIME_TARGETS[scenes[current]].0;
                    let mut best = usize::MAX;
                    let mut best_gap = -1.0;
                    for (idx, &palette) in scenes.iter().enumerate() {
                        if idx != current {
                            let gap = (REGIME_TARGETS[palette].0 - cur_v).abs();
                            if gap > best_gap {
                                best_gap = gap;
                                best = idx;
                            }
                        }
                    }
                    current = best;
                } else {
                    // Open a fresh scene in a different affect zone.
                    let pick = state_rng.next_below(REGIME_TARGETS.len() as u64 - 1) as usize;
                    let palette = if pick >= scenes[current] { pick + 1 } else { pick };
                    scenes.push(palette);
                    current = scenes.len() - 1;
                }
                let (tv, ta) = REGIME_TARGETS[scenes[current]];
                target_v = tv;
                target_a = ta;
            }
            v = clamp_unit(cfg.drift_phi * v + (1.0 - cfg.drift_phi) * target_v + 0.1 * state_rng.next_gaussian());
            a = clamp_unit(cfg.drift_phi * a + (1.0 - cfg.drift_phi) * target_a + 0.1 * state_rng.next_gaussian());
        }
        let threshold = if t == 0 { pi } else if was_suppressed { stay } else { enter };
        let suppressed = state_rng.next_f64() < threshold;
        was_suppressed = suppressed;

        let latent = latent_affect_with(v, a, &cfg.texture);
        let label_index = quantize(v, a);

        let mut noise = cfg.base_noise;
        if cfg.modality_condition == ModalityCondition::LowQuality {
            for n in &mut noise {
                *n = (*n + cfg.noise_sigma).min(1.0);
            }
        }

        let mut signals: [Option<Vec<f64>>; 3] = [None, None, None];
        for kind in ModalityKind::ALL {
            let i = kind.index();
            let content = if kind == ModalityKind::Text && suppressed {
                suppressed_text_affect_with(&cfg.texture)
            } else {
                latent.clone()
            };
            signals[i] = Some(emit_signal(
                &content,
                kind,
                noise[i],
                cfg.texture.audio_bias_scale,
                &mut noise_rng,
            ));
        }
        if cfg.modality_condition == ModalityCondition::MissingOne {
            let absent = mask_rng.next_below(3) as usize;
            signals[absent] = None;
        }
        let [text_signal, audio_signal, vision_signal] = signals;

        let mut context_tokens = BTreeSet::new();
        context_tokens.insert(format!("scene:{dialogue}:{current}"));

        turns.push(Turn {
            dialogue,
            turn: t,
            latent,
            true_label: EmotionLabel {
                index: label_index,
                name: LabelSet::default_four().get(label_index).unwrap().name.clone(),
            },
            obs: RawObservation {
                turn: t,
                text_signal,
                audio_signal,
                vision_signal,
                context_tokens,
                noise_level: noise,
            },
            suppressed,
        });
    }
    turns
}

/// Generate the full corpus, dialogue by dialogue.
pub fn generate(cfg: &ScenarioConfig) -> Result<Vec<Turn>> {
    cfg.validate()?;
    let mut turns = Vec::with_capacity((cfg.n_dialogues * cfg.turns_per_dialogue) as usize);
    for d in 0..cfg.n_dialogues {
        turns.extend(generate_dialogue(cfg, d));
    }
    Ok(turns)
}

/// Corpus JSONL: a header line holding the config, then one Turn per line.
pub fn corpus_to_string(cfg: &ScenarioConfig) -> Result<String> {
    let turns = generate(cfg)?;
    let mut out = String::new();
    out.push_str(&serde_json::to_string(&serde_json::json!({ "config": cfg }))?);
    out.push('\n');
    for turn in &turns {
        out.push_str(&serde_json::to_string(turn)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn write_corpus(cfg: &ScenarioConfig, path: &Path) -> Result<()> {
    fs::write(path, corpus_to_string(cfg)?)?;
    Ok(())
}

/// Parse a corpus file back into its config and turns.
pub fn read_corpus_str(text: &str) -> Result<(ScenarioConfig, Vec<Turn>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: serde_json::Value = match lines.next() {
        Some(line) => serde_json::from_str(line)?,
        None => return Err(Error::Config("corpus file is empty".into())),
    };
    let cfg: ScenarioConfig = serde_json::from_value(
        header
            .get("config")
            .cloned()
            .ok_or_else(|| Error::Config("corpus header missing config".into()))?,
    )?;
    let turns: Vec<Turn> = lines
        .map(serde_json::from_str)
        .collect::<std::result::Result<_, _>>()?;
    Ok((cfg, turns))
}

pub fn read_corpus(path: &Path) -> Result<(ScenarioConfig, Vec<Turn>)> {
    read_corpus_str(&fs::read_to_string(path)?)
}

/// Memoryless baseline: the engine's own encode + fuse path with no
/// retrieved memory, then argmax. Ablating every engine stage reproduces
/// this baseline exactly.
pub fn local_only(encoder: &Encoder, fusion: &FusionConfig, labels: &LabelSet, obs: &RawObservation) -> Result<Decision> {
    let emu = encoder.encode(obs)?;
    let fused = fuse(&emu.evidence, &RetrievalResult::empty(labels.len()), fusion);
    Ok(decide(&fused, labels))
}

/// Sliding-mean baseline: argmax of the mean of the last `k` local fused
/// affects (including the current turn).
pub struct TemporalContext {
    k: usize,
    window: VecDeque<AffectState>,
}

impl TemporalContext {
    pub fn new(k: usize) -> Self {
        TemporalContext { k: k.max(1), window: VecDeque::new() }
    }

    pub fn reset(&mut self) {
        self.window.clear();
    }

    pub fn step(
        &mut self,
        encoder: &Encoder,
        fusion: &FusionConfig,
        labels: &LabelSet,
        obs: &RawObservation,
    ) -> Result<Decision> {
        let emu = encoder.encode(obs)?;
        let fused = fuse(&emu.evidence, &RetrievalResult::empty(labels.len()), fusion);
        self.window.push_back(fused.affect.clone());
        while self.window.len() > self.k {
            self.window.pop_front();
        }
        let items: Vec<(&AffectState, f64)> = self.window.iter().map(|a| (a, 1.0)).collect();
        let mean = weighted_blend_affect(&items);
        let idx = mean.argmax();
        Ok(Decision {
            label: labels.get(idx).cloned().unwrap(),
            categorical: mean.categorical.clone(),
            valence: mean.valence,
            arousal: mean.arousal,
            confidence: mean.categorical[idx],
        })
    }
}
