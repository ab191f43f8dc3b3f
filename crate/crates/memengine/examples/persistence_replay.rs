//! Durable memory: append-journal replay and byte-stable snapshots.
//!
//! Run: `cargo run --example persistence_replay`

use std::collections::BTreeSet;

use memengine::encoder::RawObservation;
use memengine::engine::{Engine, EngineConfig};
use memengine::lifecycle::replay_journal;
use memengine::ltm::LtmStore;
use memengine::rng::Rng;
use memengine::scenario::{emit_signal, latent_affect};
use memengine::affect::ModalityKind;

fn main() -> memengine::Result<()> {
    let dir = std::env::temp_dir().join("memengine-persistence-example");
    std::fs::create_dir_all(&dir)?;
    let journal_path = dir.join("session.ltm.log");
    let snapshot_path = dir.join("session.ltm.json");

    let mut engine = Engine::new(EngineConfig::default())?;
    engine.enable_journal(&journal_path)?;

    let mut rng = Rng::new(3);
    for t in 0..20u64 {
        let v = if t < 12 { 0.6 } else { -0.6 };
        let latent = latent_affect(v, 0.4);
        let obs = RawObservation {
            turn: t,
            text_signal: Some(emit_signal(&latent, ModalityKind::Text, 0.05, 1.0, &mut rng)),
            audio_signal: Some(emit_signal(&latent, ModalityKind::Audio, 0.4, 1.0, &mut rng)),
            vision_signal: None,
            context_tokens: BTreeSet::from([format!("scene:{}", t / 7)]),
            noise_level: [0.05, 0.4, 0.0],
        };
        engine.step(&obs)?;
    }
    println!("live store after 20 turns: {} records", engine.store().len());

    // The journal replays to the same store, field for field.
    let journal = std::fs::read_to_string(&journal_path)?;
    println!("journal: {} lines at {}", journal.lines().count(), journal_path.display());
    let (replayed, _conflicts) = replay_journal(&journal)?;
    println!("replayed store equals live store: {}", &replayed == engine.store());

    // Snapshots round-trip byte-identically.
    engine.store().snapshot(&snapshot_path)?;
    let restored = LtmStore::restore(&snapshot_path)?;
    let bytes_match = restored.snapshot_string() == engine.store().snapshot_string();
    println!("snapshot at {}", snapshot_path.display());
    println!("restore(snapshot) re-serializes byte-identically: {bytes_match}");
    Ok(())
}
