//! The three consolidation gates: salience, anchor repetition, and decision
//! relevance.
//!
//! Run: `cargo run --example consolidation_gates`

use std::collections::BTreeSet;

use memengine::affect::{AffectState, ContextAnchor};
use memengine::ltm::{ConsolidationConfig, LtmStore};

fn anchor(dim: usize) -> ContextAnchor {
    let mut v = vec![0.0; 16];
    v[dim] = 1.0;
    ContextAnchor::new(v, BTreeSet::new()).unwrap()
}

fn main() {
    let cfg = ConsolidationConfig::default();
    let mut store = LtmStore::new();
    let calm = AffectState::new(0.1, 0.0, vec![0.25; 4]);
    let intense = AffectState::new(-0.8, 0.7, vec![0.7, 0.1, 0.1, 0.1]);

    println!("gate thresholds: salience >= {}, {} similar sightings, or a confident decision\n",
        cfg.salience_threshold, cfg.repeat_threshold);

    // 1. Low salience, first sighting, no decision relevance: rejected.
    let out = store.consolidate(&calm, &anchor(0), 0.1, 0, &cfg, false);
    println!("low-salience first sighting  -> written: {}", out.is_some());

    // 2. High salience opens the gate on its own.
    let out = store.consolidate(&intense, &anchor(1), 0.9, 1, &cfg, false);
    println!("salience 0.9                 -> written: {} (strength {:.2})",
        out.is_some(), out.as_ref().map(|r| r.strength).unwrap_or(0.0));

    // 3. Repetition: the third sighting of a similar anchor writes even at
    //    low salience.
    for attempt in 1..=3u64 {
        let out = store.consolidate(&calm, &anchor(2), 0.2, 1 + attempt, &cfg, false);
        println!("low-salience sighting #{attempt}     -> written: {}", out.is_some());
    }

    // 4. Decision relevance overrides everything.
    let out = store.consolidate(&calm, &anchor(3), 0.0, 9, &cfg, true);
    println!("decision-relevant, salience 0 -> written: {}", out.is_some());

    println!("\nstore now holds {} records:", store.len());
    for r in &store.records {
        println!("  id {} strength {:.2} valence {:+.2} created_at {}", r.id, r.strength, r.affect.valence, r.created_at);
    }
}
