//! Encode one raw multimodal observation into an Emotion Memory Unit.
//!
//! Run: `cargo run --example encode_turn`

use std::collections::BTreeSet;

use memengine::encoder::{signal_from_affect, Encoder, EncoderConfig, RawObservation};
use memengine::scenario::latent_affect;

fn main() -> memengine::Result<()> {
    let encoder = Encoder::new(EncoderConfig::default(), 4, 16)?;

    // A moderately upset moment: strong text, noisy audio, no camera.
    let felt = latent_affect(-0.55, 0.4);
    let mut tokens = BTreeSet::new();
    tokens.insert("scene:billing-dispute".to_string());

    let obs = RawObservation {
        turn: 0,
        text_signal: Some(signal_from_affect(&felt)),
        audio_signal: Some(signal_from_affect(&felt)),
        vision_signal: None,
        context_tokens: tokens,
        noise_level: [0.1, 0.6, 0.0],
    };

    let emu = encoder.encode(&obs)?;
    println!("EMU for turn {}:", emu.timestamp);
    println!("  affect: valence {:+.3}, arousal {:+.3}", emu.affect.valence, emu.affect.arousal);
    println!("  categorical: {:?}", emu.affect.categorical);
    println!("  salience: {:.3}", emu.salience);
    for e in &emu.evidence {
        println!(
            "  {:?}: present={} reliability={:.2} valence={:+.3}",
            e.kind, e.present, e.reliability, e.affect.valence
        );
    }
    println!("  anchor dim: {}, tags: {:?}", emu.anchor.dim(), emu.anchor.tags);
    println!("\ncanonical JSON:\n{}", serde_json::to_string_pretty(&emu)?);
    Ok(())
}
