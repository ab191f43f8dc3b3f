//! Score a retrieval query against a small long-term store, with the factor
//! decomposition the `inspect` subcommand prints.
//!
//! Run: `cargo run --example retrieval_scoring`

use std::collections::BTreeSet;

use memengine::affect::{AffectState, ContextAnchor};
use memengine::ltm::{LtmRecord, LtmStore};
use memengine::retrieval::{retrieve, score_record, RetrievalConfig, RetrievalQuery};

fn anchor(dim: usize) -> ContextAnchor {
    let mut v = vec![0.0; 16];
    v[dim] = 1.0;
    ContextAnchor::new(v, BTreeSet::new()).unwrap()
}

fn record(id: u64, valence: f64, dim: usize, strength: f64, last_activated: u64) -> LtmRecord {
    let mut cat = vec![0.1; 4];
    cat[if valence > 0.2 { 3 } else if valence < -0.2 { 0 } else { 2 }] = 0.7;
    LtmRecord {
        id,
        affect: AffectState::new(valence, 0.3, cat),
        anchor: anchor(dim),
        salience: 0.5,
        strength,
        activation_count: 1,
        created_at: 0,
        last_updated: 0,
        last_activated,
    }
}

fn main() {
    let store = LtmStore {
        records: vec![
            record(0, -0.6, 1, 3.0, 38), // same scene, matching affect, recent
            record(1, -0.55, 1, 8.0, 12), // same scene, strong but stale
            record(2, 0.6, 1, 5.0, 39),  // same scene, conflicting affect
            record(3, -0.6, 4, 9.0, 39), // different scene entirely
            record(4, -0.2, 1, 0.2, 35), // same scene but nearly forgotten
        ],
        next_id: 5,
        recent_anchor_counts: Vec::new(),
    };
    let query = RetrievalQuery {
        anchor: anchor(1),
        affect: AffectState::new(-0.5, 0.35, vec![0.6, 0.15, 0.15, 0.1]),
        now: 40,
    };
    let cfg = RetrievalConfig::default();

    println!("id | score  = (w_ctx*cos + w_aff*sim) * sqrt(strength/cap) * recency");
    for r in &store.records {
        let b = score_record(r, &query, &cfg);
        println!(
            "{:>2} | {:.3}  = ({:.1}*{:+.2} + {:.1}*{:+.2}) * {:.2} * {:.2}",
            b.id, b.score, cfg.w_context, b.context_term, cfg.w_affect, b.affect_term,
            b.strength_factor, b.recency_factor
        );
    }

    let result = retrieve(&store, &query, &cfg);
    println!("\ntop-{} hits above min_score {}:", cfg.top_k, cfg.min_score);
    for hit in &result.hits {
        println!("  id {} score {:.3}", hit.id, hit.score);
    }
    println!(
        "memory summary: valence {:+.3}, confidence {:.3}",
        result.memory_summary.valence, result.confidence
    );
}
