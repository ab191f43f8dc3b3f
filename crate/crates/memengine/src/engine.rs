//! The per-turn orchestrator: encode -> working memory -> query -> retrieve
//! -> fuse -> decide -> update, with ablation flags that bypass individual
//! stages without forking any code path.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::affect::{
    neutral_affect, weighted_blend_affect, AffectState, ContextAnchor, EmotionMemoryUnit, LabelSet,
    ModalityEvidence,
};
use crate::encoder::{Encoder, EncoderConfig, RawObservation};
use crate::error::{Error, Result};
use crate::fusion::{decide, fuse, Decision, FusedRepresentation, FusionConfig};
use crate::lifecycle::{update, ConflictState, LifecycleConfig, UpdateInputs};
use crate::ltm::{ConsolidationConfig, JournalOp, JournalWriter, LtmStore};
use crate::retrieval::{build_query, retrieve, RetrievalConfig, RetrievalResult};
use crate::working_memory::{WorkingMemoryConfig, WorkingMemoryState};

/// Stage-bypass switches for ablation runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AblationFlags {
    /// Replace structured EMU formation by a flat unstructured average:
    /// constant anchor, salience 0.5, affect = plain mean over the evidence
    /// slots, and per-channel reliability differentiation erased (every
    /// present channel gets the mean present reliability).
    #[serde(default)]
    pub disable_formation: bool,
    /// Force empty retrieval.
    #[serde(default)]
    pub disable_retrieval: bool,
    /// Force mu = 0 and s_i = 0.5 in fusion.
    #[serde(default)]
    pub disable_memory_fusion: bool,
    /// Skip the post-decision update pipeline entirely.
    #[serde(default)]
    pub disable_updating: bool,
    /// Skip both consolidation and retrieval (no long-term branch).
    #[serde(default)]
    pub disable_ltm: bool,
}

impl AblationFlags {
    pub fn none() -> Self {
        AblationFlags::default()
    }

    pub fn all() -> Self {
        AblationFlags {
            disable_formation: true,
            disable_retrieval: true,
            disable_memory_fusion: true,
            disable_updating: true,
            disable_ltm: true,
        }
    }

    /// Parse a comma-separated flag list: `formation`, `retrieval`,
    /// `fusion`, `updating`, `ltm`, plus `all` and `none`.
    pub fn parse_list(list: &str) -> Result<Self> {
        let mut flags = AblationFlags::none();
        for item in list.split(',').map(|s| s.trim()).filter(|s| !s.is_empty()) {
            match item {
                "formation" => flags.disable_formation = true,
                "retrieval" => flags.disable_retrieval = true,
                "fusion" => flags.disable_memory_fusion = true,
                "updating" => flags.disable_updating = true,
                "ltm" => flags.disable_ltm = true,
                "all" => flags = AblationFlags::all(),
                "none" => flags = AblationFlags::none(),
                other => return Err(Error::Config(format!("unknown ablation flag: {other}"))),
            }
        }
        Ok(flags)
    }
}

/// Composite engine configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    #[serde(default = "default_label_names")]
    pub labels: Vec<String>,
    /// Context-anchor embedding dimension.
    #[serde(default = "default_anchor_dim")]
    pub anchor_dim: usize,
    #[serde(default)]
    pub encoder: EncoderConfig,
    #[serde(default)]
    pub working_memory: WorkingMemoryConfig,
    #[serde(default)]
    pub consolidation: ConsolidationConfig,
    #[serde(default)]
    pub retrieval: RetrievalConfig,
    #[serde(default)]
    pub fusion: FusionConfig,
    #[serde(default)]
    pub lifecycle: LifecycleConfig,
    /// Reserved instance seed, recorded in manifests.
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub ablation: AblationFlags,
}

fn default_label_names() -> Vec<String> {
    vec!["anger".into(), "sadness".into(), "neutral".into(), "joy".into()]
}

fn default_anchor_dim() -> usize {
    16
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            labels: default_label_names(),
            anchor_dim: 16,
            encoder: EncoderConfig::default(),
            working_memory: WorkingMemoryConfig::default(),
            consolidation: ConsolidationConfig::default(),
            retrieval: RetrievalConfig::default(),
            fusion: FusionConfig::default(),
            lifecycle: LifecycleConfig::default(),
            seed: 0,
            ablation: AblationFlags::none(),
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<()> {
        self.working_memory.validate()?;
        self.consolidation.validate()?;
        self.retrieval.validate()?;
        self.fusion.validate()?;
        self.lifecycle.validate()?;
        if self.anchor_dim == 0 {
            return Err(Error::Config("anchor_dim must be at least 1".into()));
        }
        Ok(())
    }
}

/// Everything one turn produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TurnOutput {
    pub decision: Decision,
    pub fused: FusedRepresentation,
    pub retrieval: RetrievalResult,
    pub emu: EmotionMemoryUnit,
    pub store_size_after: usize,
}

/// One engine instance: owns its working memory, long-term store, and
/// conflict counters. `step` is the single public per-turn entry point.
#[derive(Debug)]
pub struct Engine {
    cfg: EngineConfig,
    labels: LabelSet,
    encoder: Encoder,
    wm: WorkingMemoryState,
    store: LtmStore,
    conflicts: ConflictState,
    last_turn: Option<u64>,
    journal: Option<JournalWriter>,
    flat_anchor: ContextAnchor,
}

impl Clone for Engine {
    /// Clones the full engine state; the journal writer (if any) stays with
    /// the original.
    fn clone(&self) -> Self {
        Engine {
            cfg: self.cfg.clone(),
            labels: self.labels.clone(),
            encoder: self.encoder.clone(),
            wm: self.wm.clone(),
            store: self.store.clone(),
            conflicts: self.conflicts.clone(),
            last_turn: self.last_turn,
            journal: None,
            flat_anchor: self.flat_anchor.clone(),
        }
    }
}

impl Engine {
    pub fn new(cfg: EngineConfig) -> Result<Self> {
        cfg.validate()?;
        let labels = LabelSet::from_names(cfg.labels.clone())?;
        let encoder = Encoder::new(cfg.encoder.clone(), labels.len(), cfg.anchor_dim)?;
        let wm = WorkingMemoryState::empty(labels.len());
        let flat_anchor = ContextAnchor::new(vec![1.0; cfg.anchor_dim], BTreeSet::new())
            .expect("constant anchor is non-degenerate");
        Ok(Engine {
            cfg,
            labels,
            encoder,
            wm,
            store: LtmStore::new(),
            conflicts: ConflictState::new(),
            last_turn: None,
            journal: None,
            flat_anchor,
        })
    }

    /// Start journaling every store mutation to `path`. Writes the header
    /// line carrying the configs replay needs.
    pub fn enable_journal(&mut self, path: &Path) -> Result<()> {
        let mut writer = JournalWriter::create(path)?;
        writer.append(
            &JournalOp::Init {
                consolidation: self.cfg.consolidation.clone(),
                lifecycle_json: serde_json::to_value(&self.cfg.lifecycle)?,
            },
            0,
        )?;
        self.journal = Some(writer);
        Ok(())
    }

    pub fn config(&self) -> &EngineConfig {
        &self.cfg
    }

    pub fn labels(&self) -> &LabelSet {
        &self.labels
    }

    pub fn encoder(&self) -> &Encoder {
        &self.encoder
    }

    pub fn store(&self) -> &LtmStore {
        &self.store
    }

    pub fn working_memory(&self) -> &WorkingMemoryState {
        &self.wm
    }

    pub fn conflicts(&self) -> &ConflictState {
        &self.conflicts
    }

    /// Flatten an EMU for the formation-disabled ablation: plain average of
    /// all three evidence affects, constant anchor, salience pinned to 0.5,
    /// and no per-channel reliability structure (present channels share the
    /// mean present reliability).
    fn flatten_emu(&self, emu: EmotionMemoryUnit) -> EmotionMemoryUnit {
        let items: Vec<(&AffectState, f64)> = emu.evidence.iter().map(|e| (&e.affect, 1.0)).collect();
        let affect = if items.is_empty() {
            neutral_affect(self.labels.len())
        } else {
            weighted_blend_affect(&items)
        };
        let mean_reliability = emu.mean_present_reliability();
        let evidence = emu
            .evidence
            .into_iter()
            .map(|e| {
                if e.present {
                    ModalityEvidence { reliability: mean_reliability, ..e }
                } else {
                    e
                }
            })
            .collect();
        EmotionMemoryUnit {
            affect,
            evidence,
            anchor: self.flat_anchor.clone(),
            salience: 0.5,
            timestamp: emu.timestamp,
        }
    }

    /// Run one full turn.
    pub fn step(&mut self, obs: &RawObservation) -> Result<TurnOutput> {
        if let Some(prev) = self.last_turn {
            if obs.turn <= prev {
                return Err(Error::OrderingViolation { previous: prev, attempted: obs.turn });
            }
        }
        let ablation = self.cfg.ablation;

        // 1. Encode.
        let mut emu = self.encoder.encode(obs)?;
        if ablation.disable_formation {
            emu = self.flatten_emu(emu);
        }

        // 2. Working memory.
        self.wm = self.wm.push(emu.clone(), &self.cfg.working_memory)?;

        // 3-4. Query and retrieval.
        let query = build_query(&emu, &self.wm);
        let retrieval = if ablation.disable_retrieval || ablation.disable_ltm {
            RetrievalResult::empty(self.labels.len())
        } else {
            retrieve(&self.store, &query, &self.cfg.retrieval)
        };

        // 5. Fusion. Disabling memory fusion feeds an empty retrieval into
        // the fuse step (mu = 0, s_i = 0.5) without hiding the real
        // retrieval from the turn output.
        let fused = if ablation.disable_memory_fusion {
            fuse(&emu.evidence, &RetrievalResult::empty(self.labels.len()), &self.cfg.fusion)
        } else {
            fuse(&emu.evidence, &retrieval, &self.cfg.fusion)
        };

        // 6. Decision.
        let decision = decide(&fused, &self.labels);

        // 7. Memory update.
        if !ablation.disable_updating {
            update(
                &mut self.store,
                &mut self.conflicts,
                UpdateInputs {
                    hits: &retrieval.hits,
                    decision: decision.signal(),
                    stm_affect: &self.wm.aggregate,
                    stm_anchor: &emu.anchor,
                    stm_salience: self.wm.aggregate_salience,
                    now: obs.turn,
                    skip_consolidation: ablation.disable_ltm,
                },
                &self.cfg.consolidation,
                &self.cfg.lifecycle,
                self.journal.as_mut(),
            )?;
        }

        self.last_turn = Some(obs.turn);
        Ok(TurnOutput {
            decision,
            fused,
            retrieval,
            emu,
            store_size_after: self.store.len(),
        })
    }
}
