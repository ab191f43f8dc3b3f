//! A suppressed turn ("Okay, I understand.") after accumulated frustration:
//! the memoryless reading is neutral, the memory-guided reading is not.
//!
//! Run: `cargo run --example hidden_emotion`

use std::collections::BTreeSet;

use memengine::encoder::{signal_from_affect, RawObservation};
use memengine::engine::{Engine, EngineConfig};
use memengine::rng::Rng;
use memengine::scenario::{emit_signal, latent_affect, local_only, suppressed_text_affect};
use memengine::affect::ModalityKind;

fn observation(turn: u64, text: &memengine::AffectState, latent: &memengine::AffectState, rng: &mut Rng) -> RawObservation {
    RawObservation {
        turn,
        text_signal: Some(signal_from_affect(text)),
        audio_signal: Some(emit_signal(latent, ModalityKind::Audio, 0.8, 1.0, rng)),
        vision_signal: Some(emit_signal(latent, ModalityKind::Vision, 0.95, 1.0, rng)),
        context_tokens: BTreeSet::from(["scene:support-ticket".to_string()]),
        noise_level: [0.05, 0.8, 0.95],
    }
}

fn main() -> memengine::Result<()> {
    let mut engine = Engine::new(EngineConfig::default())?;
    let mut rng = Rng::new(11);

    // Eight turns of mounting frustration, plainly worded.
    println!("history:");
    for t in 0..8u64 {
        let latent = latent_affect(-0.45 - 0.03 * t as f64, 0.45);
        let out = engine.step(&observation(t, &latent, &latent, &mut rng))?;
        println!(
            "  turn {t}: engine says {:<8} (store {} records)",
            out.decision.label.name, out.store_size_after
        );
    }

    // The ninth turn is linguistically mild while the feeling is unchanged.
    let latent = latent_affect(-0.6, 0.45);
    let muted = suppressed_text_affect();
    let obs = observation(8, &muted, &latent, &mut rng);

    let probe = Engine::new(EngineConfig::default())?;
    let baseline = local_only(probe.encoder(), &probe.config().fusion, probe.labels(), &obs)?;
    let out = engine.step(&obs)?;

    println!("\nsuppressed turn (\"okay, I understand\"):");
    println!(
        "  memoryless baseline: {} (confidence {:.2})",
        baseline.label.name, baseline.confidence
    );
    println!(
        "  memory-guided:       {} (confidence {:.2}, mu {:.2}, {} hits)",
        out.decision.label.name,
        out.decision.confidence,
        out.fused.weights.mu,
        out.retrieval.hits.len()
    );
    println!(
        "\nRetrieved history carries the trajectory the words no longer show;\n\
         the blend tips the flat local reading back toward the latent state."
    );
    Ok(())
}
