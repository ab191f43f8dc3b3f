//! Memory-guided fusion under acoustic noise: the corrupted channel loses
//! weight through both its declared reliability and its inconsistency with
//! retrieved memory.
//!
//! Run: `cargo run --example memory_guided_fusion`

use memengine::affect::{AffectState, ModalityEvidence, ModalityKind};
use memengine::fusion::{decide, fuse, FusionConfig};
use memengine::ltm::ScoredHit;
use memengine::affect::LabelSet;
use memengine::retrieval::RetrievalResult;

fn evidence(text: (AffectState, f64), audio: (AffectState, f64), vision: Option<(AffectState, f64)>) -> Vec<ModalityEvidence> {
    vec![
        ModalityEvidence::present(ModalityKind::Text, text.0, text.1),
        ModalityEvidence::present(ModalityKind::Audio, audio.0, audio.1),
        match vision {
            Some((a, r)) => ModalityEvidence::present(ModalityKind::Vision, a, r),
            None => ModalityEvidence::absent(ModalityKind::Vision, 4),
        },
    ]
}

fn main() {
    let labels = LabelSet::default_four();
    let cfg = FusionConfig::default();

    let calm_text = AffectState::new(0.05, 0.0, vec![0.15, 0.15, 0.55, 0.15]);
    let clean_audio = AffectState::new(0.1, 0.1, vec![0.15, 0.1, 0.55, 0.2]);
    // Background noise reads as anger.
    let noisy_audio = AffectState::new(-0.8, 0.9, vec![0.7, 0.1, 0.1, 0.1]);

    // Retrieved history: a stable, mildly positive trajectory.
    let memory = RetrievalResult {
        hits: vec![ScoredHit { id: 0, score: 0.8 }, ScoredHit { id: 1, score: 0.5 }],
        memory_summary: AffectState::new(0.2, 0.05, vec![0.1, 0.1, 0.45, 0.35]),
        confidence: 0.72,
    };

    println!("weights are [text, audio, vision]\n");
    for (name, audio, retrieval) in [
        ("clean audio, no memory", (clean_audio.clone(), 0.9), RetrievalResult::empty(4)),
        ("noisy audio, no memory", (noisy_audio.clone(), 0.5), RetrievalResult::empty(4)),
        ("noisy audio, with memory", (noisy_audio.clone(), 0.5), memory.clone()),
    ] {
        let ev = evidence((calm_text.clone(), 0.9), audio, None);
        let fused = fuse(&ev, &retrieval, &cfg);
        let decision = decide(&fused, &labels);
        println!("{name}:");
        println!(
            "  alpha = [{:.3}, {:.3}, {:.3}], s = [{:.2}, {:.2}, {:.2}], mu = {:.3}",
            fused.weights.weights[0], fused.weights.weights[1], fused.weights.weights[2],
            fused.weights.consistencies[0], fused.weights.consistencies[1], fused.weights.consistencies[2],
            fused.weights.mu
        );
        println!(
            "  -> {} (confidence {:.2}, valence {:+.2})\n",
            decision.label.name, decision.confidence, decision.valence
        );
    }
    println!(
        "With memory, the conflicting acoustic channel is suppressed twice over:\n\
         lower reliability shrinks its base weight, and low consistency with the\n\
         retrieved trajectory shrinks it further, so the judgment stays stable."
    );
}
