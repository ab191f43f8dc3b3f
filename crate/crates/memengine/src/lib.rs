//! memengine: a memory-centered multimodal affective inference engine.
//!
//! Per-turn multimodal evidence is encoded into structured Emotion Memory
//! Units, aggregated in a working-memory window, selectively consolidated
//! into a long-term store, retrieved when contextually relevant, and used to
//! calibrate multimodal fusion before the final affective decision. A
//! scenario simulator and evaluation harness make the long-horizon and
//! robustness behavior testable at desk scale.
//!
//! The pipeline for one turn:
//!
//! ```text
//! observation -> encode -> working memory -> retrieve -> fuse -> decide
//!                                  \____________ update ____________/
//! ```
//!
//! Start with [`engine::Engine`] for the closed loop, or pick the runnable
//! example closest to what you need:
//!
//! - **`encode_turn`** - raw multimodal observation in, Emotion Memory Unit out
//! - **`working_memory_window`** - short-term aggregation and outlier smoothing
//! - **`consolidation_gates`** - salience / repetition / decision-relevance gating
//! - **`retrieval_scoring`** - top-K scoring with the factor decomposition
//! - **`memory_guided_fusion`** - reliability x consistency modality weighting
//! - **`memory_lifecycle`** - decay, reinforcement, merging, conflict revision
//! - **`hidden_emotion`** - a suppressed turn reinterpreted through history
//! - **`end_to_end_run`** - corpus generation, engine vs baselines, scoring
//! - **`robustness_sweep`** - systems x modality conditions with retention
//! - **`persistence_replay`** - append-journal replay and snapshots
//!
//! ```bash
//! cargo run --example hidden_emotion
//! ```
//!
//! The `memengine` binary wraps the same machinery as `simulate`, `run`,
//! `robustness`, and `inspect` subcommands.

pub mod affect;
pub mod cli;
pub mod encoder;
pub mod engine;
pub mod error;
pub mod fusion;
pub mod harness;
pub mod lifecycle;
pub mod ltm;
pub mod metrics;
pub mod retrieval;
pub mod rng;
pub mod scenario;
pub mod working_memory;

pub use affect::{
    affect_similarity, blend_affect, neutral_affect, AffectState, ContextAnchor, EmotionLabel,
    EmotionMemoryUnit, LabelSet, ModalityEvidence, ModalityKind,
};
pub use encoder::{reliability_of, Encoder, EncoderConfig, RawObservation};
pub use engine::{AblationFlags, Engine, EngineConfig, TurnOutput};
pub use error::{Error, Result};
pub use fusion::{consistency, decide, fuse, Decision, FusedRepresentation, FusionConfig, FusionWeights};
pub use lifecycle::{
    decay, merge_pass, reinforce, replay_journal, resolve_conflict, update, ConflictState,
    LifecycleConfig, UpdateInputs,
};
pub use ltm::{ConsolidationConfig, DecisionSignal, LtmRecord, LtmStore, ScoredHit, STRENGTH_CAP};
pub use metrics::{retention, score, ConfusionMatrix, MetricsReport};
pub use retrieval::{
    build_query, mark_activated, retrieve, RetrievalConfig, RetrievalQuery, RetrievalResult,
};
pub use scenario::{generate, quantize, ModalityCondition, ScenarioConfig, Turn};
pub use working_memory::{WorkingMemoryConfig, WorkingMemoryState};
