//! Benchmark plumbing shared by the CLI and the acceptance suite: running a
//! system over a corpus (fresh memory per dialogue), scoring it, and fanning
//! seeds out across worker threads with a deterministic reduction order.

use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::engine::{AblationFlags, Engine, EngineConfig, TurnOutput};
use crate::error::Result;
use crate::metrics::{score, MetricsReport};
use crate::scenario::{local_only, TemporalContext, Turn};

/// Window used by the temporal-context comparison baseline: the current
/// turn plus the previous one. Wider sliding means degenerate into
/// low-accuracy, artificially flat smoothers that stop being a meaningful
/// comparison point.
pub const TEMPORAL_CONTEXT_K: usize = 2;

/// A system under evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum System {
    /// The full engine, or an ablated variant of it.
    Engine(AblationFlags),
    /// Memoryless single-turn fusion.
    LocalOnly,
    /// Sliding mean of the last `k` local affects.
    TemporalContext { k: usize },
}

impl System {
    pub fn name(&self) -> String {
        match self {
            System::Engine(flags) if *flags == AblationFlags::none() => "full".into(),
            System::Engine(flags) => {
                let mut parts = Vec::new();
                if flags.disable_formation {
                    parts.push("formation");
                }
                if flags.disable_retrieval {
                    parts.push("retrieval");
                }
                if flags.disable_memory_fusion {
                    parts.push("fusion");
                }
                if flags.disable_updating {
                    parts.push("updating");
                }
                if flags.disable_ltm {
                    parts.push("ltm");
                }
                format!("ablate:{}", parts.join("+"))
            }
            System::LocalOnly => "local_only".into(),
            System::TemporalContext { k } => format!("temporal_context[k={k}]"),
        }
    }
}

/// One scored turn of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredTurn {
    pub dialogue: u64,
    pub turn: u64,
    pub truth: usize,
    pub pred: usize,
    pub suppressed: bool,
    pub latent_valence: f64,
}

/// Per-turn scores plus the aggregate report.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredRun {
    pub turns: Vec<ScoredTurn>,
    pub report: MetricsReport,
}

/// Run the engine over a corpus, handing every full [`TurnOutput`] to
/// `on_turn`. Memory is reset per dialogue unless `carry_memory` is set, in
/// which case turn indices are remapped onto a single monotone clock.
pub fn run_engine_detailed<F>(
    cfg: &EngineConfig,
    corpus: &[Turn],
    carry_memory: bool,
    mut on_turn: F,
) -> Result<ScoredRun>
where
    F: FnMut(&Turn, &TurnOutput) -> Result<()>,
{
    let mut turns: Vec<ScoredTurn> = Vec::with_capacity(corpus.len());
    let mut engine = Engine::new(cfg.clone())?;
    let mut clock: u64 = 0;
    let mut current_dialogue: Option<u64> = None;
    for t in corpus {
        if current_dialogue != Some(t.dialogue) {
            current_dialogue = Some(t.dialogue);
            if !carry_memory {
                engine = Engine::new(cfg.clone())?;
            }
        }
        let out = if carry_memory {
            let mut obs = t.obs.clone();
            obs.turn = clock;
            clock += 1;
            engine.step(&obs)?
        } else {
            engine.step(&t.obs)?
        };
        on_turn(t, &out)?;
        turns.push(ScoredTurn {
            dialogue: t.dialogue,
            turn: t.turn,
            truth: t.true_label.index,
            pred: out.decision.label.index,
            suppressed: t.suppressed,
            latent_valence: t.latent.valence,
        });
    }
    let preds: Vec<usize> = turns.iter().map(|t| t.pred).collect();
    let truths: Vec<usize> = turns.iter().map(|t| t.truth).collect();
    let report = score(&preds, &truths, cfg.labels.len())?;
    Ok(ScoredRun { turns, report })
}

/// Run one system over a corpus with fresh memory per dialogue (unless
/// carried).
pub fn run_system(
    system: System,
    cfg: &EngineConfig,
    corpus: &[Turn],
    carry_memory: bool,
) -> Result<ScoredRun> {
    let label_count = cfg.labels.len();
    let mut turns: Vec<ScoredTurn> = Vec::with_capacity(corpus.len());

    match system {
        System::Engine(flags) => {
            let mut engine_cfg = cfg.clone();
            engine_cfg.ablation = flags;
            return run_engine_detailed(&engine_cfg, corpus, carry_memory, |_, _| Ok(()));
        }
        System::LocalOnly => {
            let probe = Engine::new(cfg.clone())?;
            for t in corpus {
                let d = local_only(probe.encoder(), &cfg.fusion, probe.labels(), &t.obs)?;
                turns.push(ScoredTurn {
                    dialogue: t.dialogue,
                    turn: t.turn,
                    truth: t.true_label.index,
                    pred: d.label.index,
                    suppressed: t.suppressed,
                    latent_valence: t.latent.valence,
                });
            }
        }
        System::TemporalContext { k } => {
            let probe = Engine::new(cfg.clone())?;
            let mut ctx = TemporalContext::new(k);
            let mut current_dialogue: Option<u64> = None;
            for t in corpus {
                if current_dialogue != Some(t.dialogue) {
                    current_dialogue = Some(t.dialogue);
                    ctx.reset();
                }
                let d = ctx.step(probe.encoder(), &cfg.fusion, probe.labels(), &t.obs)?;
                turns.push(ScoredTurn {
                    dialogue: t.dialogue,
                    turn: t.turn,
                    truth: t.true_label.index,
                    pred: d.label.index,
                    suppressed: t.suppressed,
                    latent_valence: t.latent.valence,
                });
            }
        }
    }

    let preds: Vec<usize> = turns.iter().map(|t| t.pred).collect();
    let truths: Vec<usize> = turns.iter().map(|t| t.truth).collect();
    let report = score(&preds, &truths, label_count)?;
    Ok(ScoredRun { turns, report })
}

/// Worker-thread cap: `MEMENGINE_THREADS` when set, else the machine's
/// available parallelism.
pub fn worker_threads() -> usize {
    std::env::var("MEMENGINE_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        })
}

/// Map a job over indices 0..n on up to `worker_threads()` threads; results
/// come back in index order regardless of completion order.
pub fn parallel_map<T, F>(n: usize, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    let workers = worker_threads().min(n.max(1));
    if workers <= 1 {
        return (0..n).map(&job).collect();
    }
    let slots: Mutex<Vec<Option<Result<T>>>> = Mutex::new((0..n).map(|_| None).collect());
    std::thread::scope(|scope| {
        for w in 0..workers {
            let job = &job;
            let slots = &slots;
            scope.spawn(move || {
                let mut i = w;
                while i < n {
                    let out = job(i);
                    slots.lock().expect("worker panicked holding results")[i] = Some(out);
                    i += workers;
                }
            });
        }
    });
    slots
        .into_inner()
        .expect("worker panicked holding results")
        .into_iter()
        .map(|slot| slot.expect("every index filled"))
        .collect()
}
