//! Generate a synthetic corpus, run the full engine and both baselines over
//! it, and score everything.
//!
//! Run: `cargo run --example end_to_end_run`

use memengine::engine::{AblationFlags, EngineConfig};
use memengine::harness::{run_system, System};
use memengine::scenario::{generate, ScenarioConfig};

fn main() -> memengine::Result<()> {
    let scenario = ScenarioConfig {
        n_dialogues: 40,
        turns_per_dialogue: 40,
        seed: 2024,
        ..Default::default()
    };
    let corpus = generate(&scenario)?;
    println!(
        "corpus: {} dialogues x {} turns, {} suppressed turns",
        scenario.n_dialogues,
        scenario.turns_per_dialogue,
        corpus.iter().filter(|t| t.suppressed).count()
    );

    let engine_cfg = EngineConfig::default();
    let systems = [
        ("full engine", System::Engine(AblationFlags::none())),
        ("w/o formation", System::Engine(AblationFlags { disable_formation: true, ..Default::default() })),
        ("w/o retrieval", System::Engine(AblationFlags { disable_retrieval: true, ..Default::default() })),
        ("local only", System::LocalOnly),
        ("temporal k=2", System::TemporalContext { k: 2 }),
    ];

    println!("\n{:<15} {:>9} {:>12} {:>9}", "system", "accuracy", "weighted F1", "macro F1");
    for (name, system) in systems {
        let run = run_system(system, &engine_cfg, &corpus, false)?;
        println!(
            "{:<15} {:>9.4} {:>12.4} {:>9.4}",
            name, run.report.accuracy, run.report.weighted_f1, run.report.macro_f1
        );
    }
    Ok(())
}
