//! Acceptance suite: one test per exit criterion, each printing a pass line.
//!
//! Criteria 3-5 share one benchmark computation (20 seeds x 200 dialogues x
//! 40 turns across the three modality conditions), cached behind a lock so
//! the suite runs it exactly once.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use memengine::affect::{
    affect_similarity, blend_affect, weighted_blend_affect, AffectState, ContextAnchor,
    ModalityEvidence, ModalityKind,
};
use memengine::encoder::RawObservation;
use memengine::engine::{AblationFlags, Engine, EngineConfig};
use memengine::fusion::{fuse, FusionConfig};
use memengine::harness::{parallel_map, run_system, ScoredTurn, System};
use memengine::lifecycle::{decay, merge_pass, replay_journal, LifecycleConfig};
use memengine::ltm::{ConsolidationConfig, LtmRecord, LtmStore, STRENGTH_CAP};
use memengine::metrics::{retention, score};
use memengine::retrieval::{retrieve, RetrievalConfig, RetrievalQuery, RetrievalResult};
use memengine::rng::Rng;
use memengine::scenario::{
    emit_signal, generate, latent_affect, local_only, quantize, ModalityCondition, ScenarioConfig,
    Turn, ANGER, JOY,
};
use memengine::working_memory::{aggregate, WorkingMemoryConfig, WorkingMemoryState};

// ---------------------------------------------------------------------------
// Shared benchmark (criteria 3, 4, 5)
// ---------------------------------------------------------------------------

const BENCH_SEEDS: u64 = 20;
const BENCH_DIALOGUES: u64 = 200;
const BENCH_TURNS: u64 = 40;
const TEMPORAL_K: usize = memengine::harness::TEMPORAL_CONTEXT_K;

const ABLATIONS: [(&str, AblationFlags); 5] = [
    ("formation", AblationFlags { disable_formation: true, disable_retrieval: false, disable_memory_fusion: false, disable_updating: false, disable_ltm: false }),
    ("retrieval", AblationFlags { disable_formation: false, disable_retrieval: true, disable_memory_fusion: false, disable_updating: false, disable_ltm: false }),
    ("fusion", AblationFlags { disable_formation: false, disable_retrieval: false, disable_memory_fusion: true, disable_updating: false, disable_ltm: false }),
    ("updating", AblationFlags { disable_formation: false, disable_retrieval: false, disable_memory_fusion: false, disable_updating: true, disable_ltm: false }),
    ("ltm", AblationFlags { disable_formation: false, disable_retrieval: false, disable_memory_fusion: false, disable_updating: false, disable_ltm: true }),
];

struct SeedOutcome {
    /// Complete-condition accuracy: full, then the five ablations, then
    /// local_only and temporal_context.
    complete: Vec<f64>,
    /// [system (full, local, temporal)][condition (missing, lowq)]
    degraded: [[f64; 2]; 3],
    /// Suppressed-streak subset (correct, count) for full and local.
    subset_full: (f64, f64),
    subset_local: (f64, f64),
}

struct Benchmark {
    seeds: Vec<SeedOutcome>,
}

/// Suppressed turns preceded by at least five same-sign-valence turns in
/// the same dialogue.
fn streak_subset(turns: &[ScoredTurn]) -> (f64, f64) {
    let mut correct = 0.0;
    let mut n = 0.0;
    for w in turns.windows(6) {
        let t = &w[5];
        if !t.suppressed || w.iter().any(|x| x.dialogue != t.dialogue) {
            continue;
        }
        let sign = w[0].latent_valence.signum();
        if sign == 0.0 || w[..5].iter().any(|x| x.latent_valence.signum() != sign) {
            continue;
        }
        n += 1.0;
        if t.pred == t.truth {
            correct += 1.0;
        }
    }
    (correct, n)
}

fn benchmark() -> &'static Benchmark {
    static CELL: OnceLock<Benchmark> = OnceLock::new();
    CELL.get_or_init(|| {
        let engine_cfg = EngineConfig::default();
        let seeds = parallel_map(BENCH_SEEDS as usize, |i| {
            let base = ScenarioConfig {
                n_dialogues: BENCH_DIALOGUES,
                turns_per_dialogue: BENCH_TURNS,
                seed: i as u64,
                ..Default::default()
            };
            let corpus = generate(&base)?;

            let mut complete = Vec::new();
            let full_run = run_system(System::Engine(AblationFlags::none()), &engine_cfg, &corpus, false)?;
            complete.push(full_run.report.accuracy);
            for (_, flags) in ABLATIONS {
                complete.push(run_system(System::Engine(flags), &engine_cfg, &corpus, false)?.report.accuracy);
            }
            let local_run = run_system(System::LocalOnly, &engine_cfg, &corpus, false)?;
            complete.push(local_run.report.accuracy);
            complete.push(
                run_system(System::TemporalContext { k: TEMPORAL_K }, &engine_cfg, &corpus, false)?
                    .report
                    .accuracy,
            );

            let subset_full = streak_subset(&full_run.turns);
            let subset_local = streak_subset(&local_run.turns);

            let mut degraded = [[0.0; 2]; 3];
            for (c, condition) in [ModalityCondition::MissingOne, ModalityCondition::LowQuality]
                .into_iter()
                .enumerate()
            {
                let cfg = ScenarioConfig { modality_condition: condition, ..base.clone() };
                let corpus = generate(&cfg)?;
                for (s, system) in [
                    System::Engine(AblationFlags::none()),
                    System::LocalOnly,
                    System::TemporalContext { k: TEMPORAL_K },
                ]
                .into_iter()
                .enumerate()
                {
                    degraded[s][c] = run_system(system, &engine_cfg, &corpus, false)?.report.accuracy;
                }
            }
            Ok(SeedOutcome { complete, degraded, subset_full, subset_local })
        })
        .expect("benchmark runs");
        Benchmark { seeds }
    })
}

fn mean(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let n = xs.clone().count() as f64;
    xs.sum::<f64>() / n
}

fn stddev(xs: &[f64]) -> f64 {
    let m = mean(xs.iter().copied());
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64).sqrt()
}

// ---------------------------------------------------------------------------
// Criterion 1: oracle suites
// ---------------------------------------------------------------------------

fn random_affect(rng: &mut Rng) -> AffectState {
    let cat: Vec<f64> = (0..4).map(|_| rng.next_f64()).collect();
    AffectState::new(rng.next_f64() * 2.0 - 1.0, rng.next_f64() * 2.0 - 1.0, cat)
}

fn random_anchor(rng: &mut Rng) -> ContextAnchor {
    loop {
        let v: Vec<f64> = (0..16).map(|_| rng.next_gaussian()).collect();
        if v.iter().map(|x| x * x).sum::<f64>() > 1e-6 {
            return ContextAnchor::new(v, BTreeSet::new()).unwrap();
        }
    }
}

fn random_emu(rng: &mut Rng, timestamp: u64) -> memengine::affect::EmotionMemoryUnit {
    let evidence = ModalityKind::ALL
        .iter()
        .map(|&kind| {
            if rng.next_f64() < 0.8 {
                ModalityEvidence::present(kind, random_affect(rng), rng.next_f64())
            } else {
                ModalityEvidence::absent(kind, 4)
            }
        })
        .collect();
    memengine::affect::EmotionMemoryUnit {
        affect: random_affect(rng),
        evidence,
        anchor: random_anchor(rng),
        salience: rng.next_f64(),
        timestamp,
    }
}

#[test]
fn criterion_1_oracle_suites() {
    let started = std::time::Instant::now();

    // (a) Working-memory aggregation vs a longhand weighted-mean oracle.
    let mut rng = Rng::new(0xacce01);
    for _ in 0..1000 {
        let len = 1 + rng.next_below(8) as usize;
        let buffer: Vec<_> = (0..len).map(|t| random_emu(&mut rng, t as u64)).collect();
        let now = len as u64 - 1 + rng.next_below(4);
        let cfg = WorkingMemoryConfig { window_k: 8, recency_lambda: rng.next_f64() };
        let (got_affect, got_salience, got_weights) = aggregate(&buffer, &cfg, now).unwrap();

        // Oracle: recompute raw weights and the blend from scratch.
        let mut raw = Vec::new();
        for emu in &buffer {
            let present: Vec<&ModalityEvidence> = emu.evidence.iter().filter(|e| e.present).collect();
            let mean_rel = if present.is_empty() {
                0.0
            } else {
                present.iter().map(|e| e.reliability).sum::<f64>() / present.len() as f64
            };
            let age = (now - emu.timestamp) as f64;
            raw.push((-cfg.recency_lambda * age).exp() * (0.05 + emu.salience) * (0.05 + mean_rel));
        }
        let total: f64 = raw.iter().sum();
        let mut valence = 0.0;
        let mut salience = 0.0;
        let mut cat = vec![0.0; 4];
        for (emu, &w) in buffer.iter().zip(&raw) {
            let w = w / total;
            valence += w * emu.affect.valence;
            salience += w * emu.salience;
            for (acc, &c) in cat.iter_mut().zip(&emu.affect.categorical) {
                *acc += w * c;
            }
        }
        let cat_sum: f64 = cat.iter().sum();
        for ((&got_w, &want_raw), _) in got_weights.iter().zip(&raw).zip(&buffer) {
            assert!((got_w - want_raw / total).abs() < 1e-9);
        }
        assert!((got_affect.valence - valence).abs() < 1e-9);
        assert!((got_salience - salience).abs() < 1e-9);
        for (got, want) in got_affect.categorical.iter().zip(&cat) {
            assert!((got - want / cat_sum).abs() < 1e-9);
        }
    }

    // (b) Retrieval vs a brute-force scorer on stores up to 200 records.
    let mut rng = Rng::new(0xacce02);
    for _ in 0..1000 {
        let n = rng.next_below(201);
        let mut records = Vec::new();
        for id in 0..n {
            records.push(LtmRecord {
                id,
                affect: random_affect(&mut rng),
                anchor: random_anchor(&mut rng),
                salience: rng.next_f64(),
                strength: rng.next_f64() * STRENGTH_CAP,
                activation_count: 1,
                created_at: 0,
                last_updated: 0,
                last_activated: rng.next_below(100),
            });
        }
        let store = LtmStore { records, next_id: n, recent_anchor_counts: Vec::new() };
        let query = RetrievalQuery {
            anchor: random_anchor(&mut rng),
            affect: random_affect(&mut rng),
            now: 100 + rng.next_below(50),
        };
        let w_context = rng.next_f64();
        let cfg = RetrievalConfig {
            top_k: 1 + rng.next_below(6) as usize,
            min_score: rng.next_f64() * 0.3,
            w_context,
            w_affect: 1.0 - w_context,
            recency_tau: 1.0 + rng.next_f64() * 99.0,
        };
        let got = retrieve(&store, &query, &cfg);

        // Oracle: score every record longhand, sort, cut.
        let mut scored: Vec<(u64, f64)> = store
            .records
            .iter()
            .map(|r| {
                let cos: f64 = r
                    .anchor
                    .embedding
                    .iter()
                    .zip(&query.anchor.embedding)
                    .map(|(a, b)| a * b)
                    .sum();
                let sim = affect_similarity(&r.affect, &query.affect);
                let raw = (cfg.w_context * cos.clamp(-1.0, 1.0) + cfg.w_affect * sim)
                    * (r.strength / STRENGTH_CAP).sqrt()
                    * (-((query.now - r.last_activated) as f64) / cfg.recency_tau).exp();
                (r.id, raw.max(0.0))
            })
            .filter(|(_, s)| *s >= cfg.min_score)
            .collect();
        scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        scored.truncate(cfg.top_k);

        assert_eq!(got.hits.len(), scored.len());
        for (hit, (id, s)) in got.hits.iter().zip(&scored) {
            assert_eq!(hit.id, *id, "ordering mismatch (ties must break by id)");
            assert!((hit.score - s).abs() < 1e-9);
        }
        let total: f64 = scored.iter().map(|(_, s)| s).sum();
        assert!((got.confidence - (1.0 - (-total).exp())).abs() < 1e-9);
    }

    // (c) Fusion weights vs the formula.
    let mut rng = Rng::new(0xacce03);
    for _ in 0..1000 {
        let cfg = FusionConfig {
            beta: rng.next_f64(),
            mu_max: rng.next_f64(),
            softness: 0.5 + rng.next_f64() * 7.5,
        };
        let evidence: Vec<ModalityEvidence> = ModalityKind::ALL
            .iter()
            .map(|&kind| {
                if rng.next_f64() < 0.8 {
                    ModalityEvidence::present(kind, random_affect(&mut rng), rng.next_f64())
                } else {
                    ModalityEvidence::absent(kind, 4)
                }
            })
            .collect();
        let retrieval = if rng.next_f64() < 0.5 {
            RetrievalResult::empty(4)
        } else {
            RetrievalResult {
                hits: vec![memengine::ltm::ScoredHit { id: 0, score: 0.5 }],
                memory_summary: random_affect(&mut rng),
                confidence: 0.1 + 0.9 * rng.next_f64(),
            }
        };
        let got = fuse(&evidence, &retrieval, &cfg);

        let mut raw = [0.0f64; 3];
        for (i, e) in evidence.iter().enumerate() {
            let s = if retrieval.confidence == 0.0 {
                0.5
            } else {
                (affect_similarity(&e.affect, &retrieval.memory_summary) + 1.0) / 2.0
            };
            if e.present {
                raw[i] = (e.reliability * (cfg.beta + (1.0 - cfg.beta) * s)).powf(cfg.softness);
            }
        }
        let total: f64 = raw.iter().sum();
        let n_present = evidence.iter().filter(|e| e.present).count();
        for i in 0..3 {
            let want = if !evidence[i].present {
                0.0
            } else if total > 0.0 {
                raw[i] / total
            } else {
                1.0 / n_present as f64
            };
            assert!((got.weights.weights[i] - want).abs() < 1e-9);
        }
        let mean_rel: f64 = evidence.iter().map(|e| e.reliability).sum::<f64>() / 3.0;
        let want_mu = (cfg.mu_max * retrieval.confidence * (1.0 - mean_rel)).clamp(0.0, cfg.mu_max);
        assert!((got.weights.mu - want_mu).abs() < 1e-9);
    }

    // (d) Decay vs the closed form.
    let mut rng = Rng::new(0xacce04);
    for _ in 0..1000 {
        let n = 1 + rng.next_below(20);
        let mut records = Vec::new();
        for id in 0..n {
            records.push(LtmRecord {
                id,
                affect: random_affect(&mut rng),
                anchor: random_anchor(&mut rng),
                salience: rng.next_f64(),
                strength: 0.005 + rng.next_f64() * 2.0,
                activation_count: 1,
                created_at: 0,
                last_updated: 0,
                last_activated: rng.next_below(50),
            });
        }
        let before = records.clone();
        let mut store = LtmStore { records, next_id: n, recent_anchor_counts: Vec::new() };
        let cfg = LifecycleConfig { decay_eta: rng.next_f64() * 0.3, ..Default::default() };
        let now = 50 + rng.next_below(50);
        decay(&mut store, now, &cfg);
        for r in &before {
            let dt = (now - r.last_activated) as f64;
            let expect = r.strength * (-cfg.decay_eta * dt / (1.0 + r.salience)).exp();
            match store.get(r.id) {
                Some(after) => {
                    assert!(expect >= cfg.prune_floor);
                    assert!((after.strength - expect).abs() < 1e-9);
                    assert!(after.strength <= r.strength);
                }
                None => assert!(expect < cfg.prune_floor, "only floor-crossers may be pruned"),
            }
        }
    }

    // (e) Merge pass vs an independently coded fixed-point oracle, plus
    // input-permutation invariance.
    let mut rng = Rng::new(0xacce05);
    for _ in 0..1000 {
        let n = 2 + rng.next_below(7);
        // Anchors drawn from a couple of clusters so merges actually happen.
        let hub_a = random_anchor(&mut rng);
        let hub_b = random_anchor(&mut rng);
        let mut records = Vec::new();
        for id in 0..n {
            let hub = if rng.next_f64() < 0.5 { &hub_a } else { &hub_b };
            let jitter: Vec<f64> = hub
                .embedding
                .iter()
                .map(|x| x + 0.02 * rng.next_gaussian())
                .collect();
            let base_v = if rng.next_f64() < 0.5 { 0.5 } else { -0.5 };
            records.push(LtmRecord {
                id,
                affect: AffectState::new(
                    base_v + 0.02 * rng.next_gaussian(),
                    0.2,
                    vec![0.4, 0.3, 0.2, 0.1],
                ),
                anchor: ContextAnchor::new(jitter, BTreeSet::new()).unwrap(),
                salience: rng.next_f64(),
                strength: 0.2 + rng.next_f64() * 3.0,
                activation_count: 1 + rng.next_below(5),
                created_at: rng.next_below(10),
                last_updated: 10 + rng.next_below(10),
                last_activated: 10 + rng.next_below(10),
            });
        }
        let cfg = LifecycleConfig::default();

        // Oracle: naive fixed point over an id-sorted vector.
        let mut oracle: Vec<LtmRecord> = records.clone();
        oracle.sort_by_key(|r| r.id);
        loop {
            let mut merged = None;
            'outer: for i in 0..oracle.len() {
                for j in (i + 1)..oracle.len() {
                    let (a, b) = (&oracle[i], &oracle[j]);
                    let cos: f64 = a
                        .anchor
                        .embedding
                        .iter()
                        .zip(&b.anchor.embedding)
                        .map(|(x, y)| x * y)
                        .sum();
                    if cos.clamp(-1.0, 1.0) >= cfg.merge_sim
                        && affect_similarity(&a.affect, &b.affect) >= cfg.merge_sim
                    {
                        merged = Some((i, j));
                        break 'outer;
                    }
                }
            }
            let Some((i, j)) = merged else { break };
            let b = oracle.remove(j);
            let a = &mut oracle[i];
            let total = a.strength + b.strength;
            let w = b.strength / total;
            let emb: Vec<f64> = a
                .anchor
                .embedding
                .iter()
                .zip(&b.anchor.embedding)
                .map(|(x, y)| a.strength * x + b.strength * y)
                .collect();
            a.affect = blend_affect(&a.affect, &b.affect, w).unwrap();
            a.anchor = ContextAnchor::new(emb, a.anchor.tags.clone()).unwrap();
            a.salience = (a.strength * a.salience + b.strength * b.salience) / total;
            a.strength = total.min(STRENGTH_CAP);
            a.activation_count += b.activation_count;
            a.created_at = a.created_at.min(b.created_at);
            a.last_updated = a.last_updated.max(b.last_updated);
            a.last_activated = a.last_activated.max(b.last_activated);
            a.id = a.id.min(b.id);
        }

        // Implementation, fed the records in a shuffled order.
        let mut shuffled = records.clone();
        for i in (1..shuffled.len()).rev() {
            let j = rng.next_below(i as u64 + 1) as usize;
            shuffled.swap(i, j);
        }
        shuffled.sort_by_key(|r| r.id);
        let mut store = LtmStore { records: shuffled, next_id: n, recent_anchor_counts: Vec::new() };
        merge_pass(&mut store, &cfg);

        assert_eq!(store.len(), oracle.len());
        for (got, want) in store.records.iter().zip(&oracle) {
            assert_eq!(got.id, want.id);
            assert!((got.strength - want.strength).abs() < 1e-9);
            assert!((got.affect.valence - want.affect.valence).abs() < 1e-9);
            assert_eq!(got.activation_count, want.activation_count);
        }

        // Idempotence.
        let once = store.clone();
        merge_pass(&mut store, &cfg);
        assert_eq!(store, once);
    }

    // (f) Metrics vs an independent implementation, at 1e-12.
    let mut rng = Rng::new(0xacce06);
    for _ in 0..1000 {
        let l = 2 + rng.next_below(5) as usize;
        let n = 1 + rng.next_below(300) as usize;
        let truths: Vec<usize> = (0..n).map(|_| rng.next_below(l as u64) as usize).collect();
        let preds: Vec<usize> = (0..n).map(|_| rng.next_below(l as u64) as usize).collect();
        let got = score(&preds, &truths, l).unwrap();

        let mut tp = vec![0f64; l];
        let mut pred_count = vec![0f64; l];
        let mut true_count = vec![0f64; l];
        let mut correct = 0f64;
        for (&p, &t) in preds.iter().zip(&truths) {
            pred_count[p] += 1.0;
            true_count[t] += 1.0;
            if p == t {
                tp[p] += 1.0;
                correct += 1.0;
            }
        }
        let mut macro_f1 = 0.0;
        let mut weighted_f1 = 0.0;
        for c in 0..l {
            let precision = if pred_count[c] > 0.0 { tp[c] / pred_count[c] } else { 0.0 };
            let recall = if true_count[c] > 0.0 { tp[c] / true_count[c] } else { 0.0 };
            let f1 = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            };
            macro_f1 += f1 / l as f64;
            weighted_f1 += true_count[c] / n as f64 * f1;
        }
        assert!((got.accuracy - correct / n as f64).abs() < 1e-12);
        assert!((got.macro_f1 - macro_f1).abs() < 1e-12);
        assert!((got.weighted_f1 - weighted_f1).abs() < 1e-12);
    }

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 60, "oracle suites took {elapsed:?}");
    println!("[PASS] criterion 1: six oracle suites x 1000 randomized instances ({elapsed:?})");
}

// ---------------------------------------------------------------------------
// Criterion 2: retention formula reproduction
// ---------------------------------------------------------------------------

#[test]
fn criterion_2_retention_reference_rows() {
    let first = retention(68.4, 64.2, 62.0).unwrap();
    let last = retention(60.2, 54.1, 51.6).unwrap();
    assert!((first - 92.3).abs() <= 0.05, "got {first}");
    assert!((last - 87.8).abs() <= 0.05, "got {last}");
    println!("[PASS] criterion 2: retention rows reproduce 92.3 ({first:.4}) and 87.8 ({last:.4})");
}

// ---------------------------------------------------------------------------
// Criterion 3: ablation ordering
// ---------------------------------------------------------------------------

#[test]
fn criterion_3_ablation_ordering() {
    let started = std::time::Instant::now();
    let bench = benchmark();

    let names: Vec<&str> = std::iter::once("full").chain(ABLATIONS.iter().map(|(n, _)| *n)).collect();
    let mut per_system: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for seed in &bench.seeds {
        for (i, acc) in seed.complete.iter().take(names.len()).enumerate() {
            per_system[i].push(*acc);
        }
    }
    let means: Vec<f64> = per_system.iter().map(|xs| mean(xs.iter().copied())).collect();
    for (name, (m, sd)) in names.iter().zip(means.iter().zip(per_system.iter().map(|xs| stddev(xs)))) {
        println!("  {name:>10}: accuracy {:.4} (seed sd {:.4})", m, sd);
    }

    let full = means[0];
    let ablation_means = &means[1..];
    let best = ablation_means.iter().cloned().fold(f64::MIN, f64::max);
    let worst_idx = ablation_means
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap()
        .0;

    for (name, m) in names[1..].iter().zip(ablation_means) {
        assert!(full > *m, "full ({full:.4}) must exceed ablation {name} ({m:.4})");
    }
    assert_eq!(names[1 + worst_idx], "formation", "disable_formation must be the worst ablation");
    assert!(
        full - best >= 0.005,
        "margin over best ablation is {:.4}, need >= 0.005",
        full - best
    );
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 600, "criterion 3 took {elapsed:?}");
    println!(
        "[PASS] criterion 3: full {:.4} > all ablations (best {:.4}, margin {:.2} pts), formation worst ({elapsed:?})",
        full,
        best,
        100.0 * (full - best)
    );
}

// ---------------------------------------------------------------------------
// Criterion 4: robustness retention
// ---------------------------------------------------------------------------

#[test]
fn criterion_4_robustness_retention() {
    let started = std::time::Instant::now();
    let bench = benchmark();

    // Complete indices in SeedOutcome.complete: full 0, local 6, temporal 7.
    let complete_idx = [0usize, 6, 7];
    let mut retentions = Vec::new();
    for (sys, &ci) in ["full", "local_only", "temporal_context"].iter().zip(&complete_idx) {
        let complete = mean(bench.seeds.iter().map(|s| s.complete[ci]));
        let s_idx = match *sys {
            "full" => 0,
            "local_only" => 1,
            _ => 2,
        };
        let missing = mean(bench.seeds.iter().map(|s| s.degraded[s_idx][0]));
        let lowq = mean(bench.seeds.iter().map(|s| s.degraded[s_idx][1]));
        let r = retention(100.0 * complete, 100.0 * missing, 100.0 * lowq).unwrap();
        println!(
            "  {sys:>16}: complete {:.4} missing {:.4} lowq {:.4} retention {:.2}%",
            complete, missing, lowq, r
        );
        retentions.push(r);
    }
    let (full, local, temporal) = (retentions[0], retentions[1], retentions[2]);
    assert!(
        full >= local + 2.0,
        "full retention {full:.2} must exceed local {local:.2} by >= 2 points"
    );
    assert!(full > temporal, "full retention {full:.2} must exceed temporal {temporal:.2}");
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 900, "criterion 4 took {elapsed:?}");
    println!(
        "[PASS] criterion 4: retention full {full:.2} > temporal {temporal:.2} > local {local:.2} (gap {:.2} >= 2) ({elapsed:?})",
        full - local
    );
}

// ---------------------------------------------------------------------------
// Criterion 5: hidden-emotion subset
// ---------------------------------------------------------------------------

#[test]
fn criterion_5_suppressed_streak_subset() {
    let bench = benchmark();
    let (mut fc, mut fn_, mut lc, mut ln) = (0.0, 0.0, 0.0, 0.0);
    for seed in &bench.seeds {
        fc += seed.subset_full.0;
        fn_ += seed.subset_full.1;
        lc += seed.subset_local.0;
        ln += seed.subset_local.1;
    }
    let full = fc / fn_;
    let local = lc / ln;
    assert!(fn_ >= 500.0, "subset too small to be meaningful: {fn_}");
    assert!(
        full >= local + 0.10,
        "full {full:.4} must beat local {local:.4} by >= 10 points on the suppressed subset"
    );
    println!(
        "[PASS] criterion 5: suppressed-streak subset ({} turns): full {:.4} vs local {:.4} (+{:.1} pts)",
        fn_ as u64,
        full,
        local,
        100.0 * (full - local)
    );
}

// ---------------------------------------------------------------------------
// Criterion 6: noisy-audio matched pairs
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_noisy_audio_pairs() {
    let engine_cfg = EngineConfig::default();
    let fusion_cfg = FusionConfig::default();
    let mut pairs = 0usize;
    let mut alpha_violations = 0usize;
    let mut full_flips = 0usize;
    let mut local_flips = 0usize;

    for seed in 100..103u64 {
        let cfg = ScenarioConfig {
            n_dialogues: 10,
            turns_per_dialogue: 40,
            seed,
            ..Default::default()
        };
        let corpus = generate(&cfg).unwrap();
        let probe = Engine::new(engine_cfg.clone()).unwrap();
        let mut engine = Engine::new(engine_cfg.clone()).unwrap();
        let mut current_dialogue = u64::MAX;
        for turn in &corpus {
            if turn.dialogue != current_dialogue {
                current_dialogue = turn.dialogue;
                engine = Engine::new(engine_cfg.clone()).unwrap();
            }
            if turn.turn >= 10 {
                let mut pair_rng = Rng::derive(seed, &[turn.dialogue, turn.turn, 0xca5e2]);
                let latent = latent_affect(turn.latent.valence, turn.latent.arousal);
                // Conflicting corruption: acoustic artifacts read as the
                // opposite-valence emotion (anger over positive/neutral
                // context, agitation-free joy over negative context).
                let corruption = if turn.latent.valence < -0.05 {
                    let mut cat = vec![0.1; 4];
                    cat[JOY] = 0.7;
                    AffectState::new(0.8, 0.4, cat)
                } else {
                    let mut cat = vec![0.1; 4];
                    cat[ANGER] = 0.7;
                    AffectState::new(-0.8, 0.8, cat)
                };

                let mut clean = turn.obs.clone();
                clean.audio_signal =
                    Some(emit_signal(&latent, ModalityKind::Audio, 0.1, 1.0, &mut pair_rng));
                clean.noise_level[1] = 0.1;

                let mut noisy = turn.obs.clone();
                noisy.audio_signal =
                    Some(emit_signal(&corruption, ModalityKind::Audio, 0.7, 1.0, &mut pair_rng));
                noisy.noise_level[1] = 0.7;

                let out_clean = engine.clone().step(&clean).unwrap();
                let out_noisy = engine.clone().step(&noisy).unwrap();
                let a_clean = out_clean.fused.weights.weights[1];
                let a_noisy = out_noisy.fused.weights.weights[1];
                if a_noisy >= a_clean {
                    alpha_violations += 1;
                }
                if out_clean.decision.label.index != out_noisy.decision.label.index {
                    full_flips += 1;
                }

                let l_clean = local_only(probe.encoder(), &fusion_cfg, probe.labels(), &clean).unwrap();
                let l_noisy = local_only(probe.encoder(), &fusion_cfg, probe.labels(), &noisy).unwrap();
                if l_clean.label.index != l_noisy.label.index {
                    local_flips += 1;
                }
                pairs += 1;
            }
            engine.step(&turn.obs).unwrap();
        }
    }

    let full_rate = full_flips as f64 / pairs as f64;
    assert_eq!(alpha_violations, 0, "alpha_audio(noisy) < alpha_audio(clean) must hold on all pairs");
    assert!(full_rate <= 0.20, "full flip rate {full_rate:.3} exceeds 20%");
    assert!(
        local_flips > full_flips,
        "local must flip strictly more ({local_flips} vs {full_flips})"
    );
    println!(
        "[PASS] criterion 6: {pairs} pairs, alpha ordering 100%, flips full {full_flips} ({:.1}%) < local {local_flips} ({:.1}%)",
        100.0 * full_rate,
        100.0 * local_flips as f64 / pairs as f64
    );
}

// ---------------------------------------------------------------------------
// Criterion 7: missing-vision continuation
// ---------------------------------------------------------------------------

#[test]
fn criterion_7_missing_vision_drop() {
    let engine_cfg = EngineConfig::default();
    // Vision-led variant of the scenario: the camera carries the reliable
    // evidence, text and audio are coarse.
    let drops: Vec<(f64, f64)> = parallel_map(20, |i| {
        let cfg = ScenarioConfig {
            n_dialogues: 30,
            turns_per_dialogue: 40,
            seed: 700 + i as u64,
            base_noise: [0.55, 0.6, 0.08],
            ..Default::default()
        };
        let complete = generate(&cfg)?;
        let masked: Vec<Turn> = complete
            .iter()
            .map(|t| {
                let mut t = t.clone();
                if t.turn >= 10 {
                    t.obs.vision_signal = None;
                }
                t
            })
            .collect();

        let acc = |sys: System, corpus: &[Turn]| -> memengine::Result<f64> {
            Ok(run_system(sys, &engine_cfg, corpus, false)?.report.accuracy)
        };
        let full_drop = acc(System::Engine(AblationFlags::none()), &complete)?
            - acc(System::Engine(AblationFlags::none()), &masked)?;
        let local_drop = acc(System::LocalOnly, &complete)? - acc(System::LocalOnly, &masked)?;
        Ok((full_drop, local_drop))
    })
    .unwrap();

    let full_drop = mean(drops.iter().map(|d| d.0));
    let local_drop = mean(drops.iter().map(|d| d.1));
    assert!(
        full_drop < local_drop,
        "full's accuracy drop {full_drop:.4} must be smaller than local's {local_drop:.4}"
    );
    println!(
        "[PASS] criterion 7: vision masked after turn 10 -> drop full {:.2} pts < local {:.2} pts (20 seeds)",
        100.0 * full_drop,
        100.0 * local_drop
    );
}

// ---------------------------------------------------------------------------
// Criterion 8: consolidation gate soundness (the one randomized invariant
// not already covered by module unit tests)
// ---------------------------------------------------------------------------

#[test]
fn criterion_8_gate_soundness_and_invariant_suite() {
    // Gate soundness: 10,000 random (salience, repetition, relevance)
    // triples against an independently coded predicate.
    let mut rng = Rng::new(0xacce08);
    let cfg = ConsolidationConfig::default();
    let mut writes = 0usize;
    for _ in 0..10_000 {
        let mut store = LtmStore::new();
        let anchor = random_anchor(&mut rng);
        // Random prior sightings of a similar or dissimilar anchor.
        let sightings = rng.next_below(5);
        let similar = rng.next_f64() < 0.5;
        let seen_anchor = if similar {
            anchor.clone()
        } else {
            let mut other = random_anchor(&mut rng);
            while other.cosine(&anchor) >= cfg.anchor_repeat_sim {
                other = random_anchor(&mut rng);
            }
            other
        };
        for t in 0..sightings {
            // Below-gate attempts tally the anchor without writing.
            store.consolidate(&random_affect(&mut rng), &seen_anchor, 0.0, t, &cfg, false);
        }
        let salience = rng.next_f64();
        let relevant = rng.next_f64() < 0.3;
        let before = store.len();
        let out = store.consolidate(&random_affect(&mut rng), &anchor, salience, 99, &cfg, relevant);

        // Independent predicate.
        let repetition = if similar { sightings + 1 } else { 1 };
        let expect = salience >= cfg.salience_threshold
            || repetition >= cfg.repeat_threshold
            || relevant;
        assert_eq!(out.is_some(), expect, "gate mismatch: salience {salience}, sightings {sightings}, similar {similar}, relevant {relevant}");
        assert_eq!(store.len(), before + usize::from(expect));
        writes += usize::from(expect);
    }
    assert!(writes > 1000 && writes < 9000, "degenerate gate sampling: {writes}");
    println!("[PASS] criterion 8: gate soundness on 10,000 random triples (plus module invariant tests)");
}

// ---------------------------------------------------------------------------
// Criterion 9: persistence replay
// ---------------------------------------------------------------------------

#[test]
fn criterion_9_persistence_replay() {
    let dir = tempfile::tempdir().unwrap();
    let journal_path = dir.path().join("run.ltm.log");
    let snapshot_path = dir.path().join("run.ltm.json");

    let mut engine = Engine::new(EngineConfig::default()).unwrap();
    engine.enable_journal(&journal_path).unwrap();

    // A scripted 20-turn run covering consolidation, reinforcement, decay,
    // merging, and conflict pressure (late opposite-valence swing).
    let mut rng = Rng::new(0xacce09);
    for t in 0..20u64 {
        let (v, a) = if t < 12 { (0.7, 0.5) } else { (-0.65, 0.55) };
        let affect = latent_affect(v + 0.05 * rng.next_gaussian(), a);
        let tokens: BTreeSet<String> = [format!("scene:{}", t / 6)].into_iter().collect();
        let obs = RawObservation {
            turn: t,
            text_signal: Some(emit_signal(&affect, ModalityKind::Text, 0.05, 1.0, &mut rng)),
            audio_signal: Some(emit_signal(&affect, ModalityKind::Audio, 0.3, 1.0, &mut rng)),
            vision_signal: if t % 5 == 0 {
                None
            } else {
                Some(emit_signal(&affect, ModalityKind::Vision, 0.4, 1.0, &mut rng))
            },
            context_tokens: tokens,
            noise_level: [0.05, 0.3, 0.4],
        };
        engine.step(&obs).unwrap();
    }
    assert!(!engine.store().is_empty(), "the scripted run must consolidate something");

    // Journal replay reproduces the live store field-identically.
    let journal_text = std::fs::read_to_string(&journal_path).unwrap();
    let (replayed, conflicts) = replay_journal(&journal_text).unwrap();
    assert_eq!(&replayed, engine.store(), "replayed store must equal the live store");
    assert_eq!(&conflicts, engine.conflicts());

    // Snapshot round trip is byte-identical.
    engine.store().snapshot(&snapshot_path).unwrap();
    let bytes_a = std::fs::read(&snapshot_path).unwrap();
    let restored = LtmStore::restore(&snapshot_path).unwrap();
    assert_eq!(&restored, engine.store());
    assert_eq!(restored.snapshot_string().into_bytes(), bytes_a);

    println!(
        "[PASS] criterion 9: 20-turn journal replays to a field-identical store ({} records); snapshot round-trip byte-identical",
        replayed.len()
    );
}

// ---------------------------------------------------------------------------
// Sanity: query construction (exercised end to end above, pinned here)
// ---------------------------------------------------------------------------

#[test]
fn query_midpoint_blend_matches_oracle() {
    let labels = 4;
    let emu = random_emu(&mut Rng::new(77), 3);
    let wm = WorkingMemoryState::empty(labels)
        .push(random_emu(&mut Rng::new(78), 2), &Default::default())
        .unwrap();
    let q = memengine::retrieval::build_query(&emu, &wm);
    let expect = blend_affect(&emu.affect, &wm.aggregate, 0.5).unwrap();
    assert_eq!(q.affect, expect);
    assert_eq!(q.now, emu.timestamp);

    // Score-weighted summary blend sanity against weighted_blend_affect.
    let items = [(&emu.affect, 0.3), (&wm.aggregate, 0.7)];
    let blend = weighted_blend_affect(&items);
    assert!((blend.categorical.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    let _ = quantize(blend.valence, blend.arousal);
}
