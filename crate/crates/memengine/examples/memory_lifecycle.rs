//! Post-decision memory maintenance: decay, reinforcement, merging, and
//! conflict-driven revision.
//!
//! Run: `cargo run --example memory_lifecycle`

use std::collections::BTreeSet;

use memengine::affect::{AffectState, ContextAnchor};
use memengine::lifecycle::{decay, merge_pass, reinforce, resolve_conflict, ConflictState, LifecycleConfig};
use memengine::ltm::{DecisionSignal, LtmRecord, LtmStore, ScoredHit};

fn record(id: u64, valence: f64, strength: f64, salience: f64) -> LtmRecord {
    LtmRecord {
        id,
        affect: AffectState::new(valence, 0.3, vec![0.25; 4]),
        anchor: ContextAnchor::new(vec![1.0; 16], BTreeSet::new()).unwrap(),
        salience,
        strength,
        activation_count: 1,
        created_at: 0,
        last_updated: 0,
        last_activated: 0,
    }
}

fn main() {
    let cfg = LifecycleConfig::default();

    // Decay: salience slows forgetting; the floor prunes.
    let mut store = LtmStore {
        records: vec![record(0, 0.5, 1.0, 0.0), record(1, 0.5, 1.0, 0.9), record(2, 0.5, 0.012, 0.0)],
        next_id: 3,
        recent_anchor_counts: Vec::new(),
    };
    decay(&mut store, 25, &cfg);
    println!("after 25 turns unactivated:");
    for r in &store.records {
        println!("  id {} salience {:.1} -> strength {:.4}", r.id, r.salience, r.strength);
    }
    println!("  (id 2 fell below the prune floor and is gone)\n");

    // Reinforcement: agreeing hits strengthen by score share.
    let decision = DecisionSignal {
        affect: AffectState::new(0.45, 0.3, vec![0.1, 0.1, 0.2, 0.6]),
        confidence: 0.8,
    };
    let hits = [ScoredHit { id: 0, score: 0.6 }, ScoredHit { id: 1, score: 0.2 }];
    let before: Vec<f64> = store.records.iter().map(|r| r.strength).collect();
    reinforce(&mut store, &hits, &decision, &cfg).unwrap();
    for (r, b) in store.records.iter().zip(before) {
        println!("reinforced id {}: {:.4} -> {:.4}", r.id, b, r.strength);
    }

    // Merging: near-duplicates collapse into one stronger record.
    let mut store = LtmStore {
        records: vec![record(0, 0.50, 1.0, 0.5), record(1, 0.52, 1.5, 0.5), record(2, -0.6, 1.0, 0.5)],
        next_id: 3,
        recent_anchor_counts: Vec::new(),
    };
    merge_pass(&mut store, &cfg);
    println!("\nafter merge pass: {} records", store.len());
    for r in &store.records {
        println!("  id {} valence {:+.3} strength {:.2} activations {}", r.id, r.affect.valence, r.strength, r.activation_count);
    }

    // Conflict resolution: three consecutive confident contradictions revise
    // the record; fewer are treated as temporary deviation.
    let mut store = LtmStore { records: vec![record(0, -0.8, 2.0, 0.5)], next_id: 1, recent_anchor_counts: Vec::new() };
    let mut conflicts = ConflictState::new();
    let contradicting = DecisionSignal {
        affect: AffectState::new(0.6, 0.2, vec![0.1, 0.1, 0.2, 0.6]),
        confidence: 0.85,
    };
    println!("\nconflict streak against a valence -0.80 record:");
    for turn in 1..=3 {
        resolve_conflict(&mut store, &mut conflicts, &[ScoredHit { id: 0, score: 1.0 }], &contradicting, turn, &cfg).unwrap();
        println!(
            "  turn {}: streak {:?}, record valence {:+.3}",
            turn,
            conflicts.streaks.get(&0).copied().unwrap_or(0),
            store.get(0).unwrap().affect.valence
        );
    }
    println!("  (revision blended the record toward the decision at rate {})", cfg.revision_rate);
}
