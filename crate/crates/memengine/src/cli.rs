//! Command-line front end: scenario generation (`simulate`), engine runs
//! with scoring (`run`), robustness sweeps (`robustness`), and snapshot
//! inspection (`inspect`).
//!
//! Exit codes: 0 on success, 2 on usage/input errors, 3 on an internal
//! invariant violation (panic).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::engine::{AblationFlags, EngineConfig};
use crate::error::{Error, Result};
use crate::harness::{parallel_map, run_engine_detailed, run_system, ScoredRun, System};
use crate::ltm::LtmStore;
use crate::metrics::retention;
use crate::retrieval::{retrieve, score_record, RetrievalConfig, RetrievalQuery};
use crate::scenario::{read_corpus, write_corpus, ModalityCondition, ScenarioConfig};

#[derive(Parser)]
#[command(name = "memengine", version, about = "Memory-centered multimodal affective inference engine")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic scenario corpus (JSONL).
    Simulate {
        /// Scenario config JSON file.
        #[arg(long)]
        config: PathBuf,
        /// Output corpus path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the engine over a corpus and score it against ground truth.
    Run {
        /// Corpus JSONL produced by `simulate`.
        #[arg(long)]
        corpus: PathBuf,
        /// Engine config JSON file (defaults when omitted).
        #[arg(long)]
        engine_config: Option<PathBuf>,
        /// Per-turn output JSONL path.
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated ablation flags:
        /// formation,retrieval,fusion,updating,ltm,all,none.
        #[arg(long)]
        ablate: Option<String>,
        /// Keep long-term memory across dialogues.
        #[arg(long, default_value_t = false)]
        carry_memory: bool,
        /// Also write the metrics report to this path.
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
    /// Sweep systems x modality conditions x seeds; emit a retention report.
    Robustness {
        /// Engine config JSON file (defaults when omitted).
        #[arg(long)]
        engine_config: Option<PathBuf>,
        /// Scenario config JSON file (defaults when omitted); its
        /// modality_condition field is overridden per sweep cell.
        #[arg(long)]
        scenario_config: Option<PathBuf>,
        /// Number of seeds (seed values are config.seed .. config.seed + N).
        #[arg(long, default_value_t = 5)]
        seeds: u64,
        /// Write the JSON report here as well as stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Optionally write a CSV summary table.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Score one retrieval query against a store snapshot.
    Inspect {
        /// Store snapshot (`*.ltm.json`).
        #[arg(long)]
        snapshot: PathBuf,
        /// Retrieval query as inline JSON: {"anchor": ..., "affect": ..., "now": N}.
        #[arg(long)]
        query: String,
        /// Retrieval config JSON file (defaults when omitted).
        #[arg(long)]
        retrieval_config: Option<PathBuf>,
    },
}

fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("cannot parse {}: {e}", path.display())))
}

fn load_or_default<T: DeserializeOwned + Default>(path: &Option<PathBuf>) -> Result<T> {
    match path {
        Some(p) => load_json(p),
        None => Ok(T::default()),
    }
}

/// Provenance record written next to every artifact an invocation emits.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub corpus: Option<String>,
    pub outputs: Vec<String>,
    pub seeds: Vec<u64>,
}

impl RunManifest {
    fn new(command: &str, config: serde_json::Value) -> Self {
        RunManifest {
            version: format!("memengine {}", env!("CARGO_PKG_VERSION")),
            command: command.into(),
            config,
            corpus: None,
            outputs: Vec::new(),
            seeds: Vec::new(),
        }
    }

    fn write_next_to(&self, artifact: &Path) -> Result<PathBuf> {
        let path = artifact.with_extension("manifest.json");
        fs::write(&path, serde_json::to_string_pretty(self)?)?;
        Ok(path)
    }
}

/// Parse arguments and dispatch. Returns `Err` for input/usage problems
/// (exit 2); panics become exit 3 in the binary wrapper.
pub fn run() -> Result<()> {
    dispatch(Cli::parse())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { config, out } => {
            let cfg: ScenarioConfig = load_json(&config)?;
            cfg.validate()?;
            write_corpus(&cfg, &out)?;
            let mut manifest = RunManifest::new("simulate", serde_json::to_value(&cfg)?);
            manifest.outputs.push(out.display().to_string());
            manifest.seeds.push(cfg.seed);
            let manifest_path = manifest.write_next_to(&out)?;
            eprintln!("wrote {} (manifest {})", out.display(), manifest_path.display());
            Ok(())
        }
        Command::Run { corpus, engine_config, out, ablate, carry_memory, metrics } => {
            let mut cfg: EngineConfig = load_or_default(&engine_config)?;
            if let Some(list) = &ablate {
                cfg.ablation = AblationFlags::parse_list(list)?;
            }
            cfg.validate()?;
            let (_, turns) = read_corpus(&corpus)?;

            let mut manifest = RunManifest::new("run", serde_json::to_value(&cfg)?);
            manifest.corpus = Some(corpus.display().to_string());
            manifest.outputs.push(out.display().to_string());
            let manifest_path = manifest.write_next_to(&out)?;

            let mut file = fs::File::create(&out)?;
            writeln!(
                file,
                "{}",
                serde_json::json!({ "manifest": manifest_path.display().to_string() })
            )?;
            let run = run_engine_detailed(&cfg, &turns, carry_memory, |turn, output| {
                let line = serde_json::json!({
                    "dialogue": turn.dialogue,
                    "turn": turn.turn,
                    "truth": turn.true_label,
                    "suppressed": turn.suppressed,
                    "output": output,
                });
                writeln!(file, "{line}")?;
                Ok(())
            })?;

            let report = serde_json::json!({
                "manifest": manifest_path.display().to_string(),
                "report": run.report,
            });
            let pretty = serde_json::to_string_pretty(&report)?;
            if let Some(metrics_path) = metrics {
                fs::write(&metrics_path, &pretty)?;
            }
            println!("{pretty}");
            Ok(())
        }
        Command::Robustness { engine_config, scenario_config, seeds, out, csv } => {
            let engine_cfg: EngineConfig = load_or_default(&engine_config)?;
            engine_cfg.validate()?;
            let base: ScenarioConfig = match &scenario_config {
                Some(p) => load_json(p)?,
                None => ScenarioConfig { n_dialogues: 20, ..Default::default() },
            };
            base.validate()?;
            if seeds < 1 {
                return Err(Error::Config("seeds must be at least 1".into()));
            }
            let report = robustness_report(&engine_cfg, &base, seeds)?;

            let mut manifest = RunManifest::new(
                "robustness",
                serde_json::json!({
                    "engine": engine_cfg,
                    "scenario": base,
                }),
            );
            manifest.seeds = (0..seeds).map(|i| base.seed + i).collect();
            let mut body = serde_json::to_value(&report)?;
            if let Some(out_path) = &out {
                manifest.outputs.push(out_path.display().to_string());
                let manifest_path = manifest.write_next_to(out_path)?;
                body["manifest"] = serde_json::Value::String(manifest_path.display().to_string());
                fs::write(out_path, serde_json::to_string_pretty(&body)?)?;
            }
            if let Some(csv_path) = &csv {
                fs::write(csv_path, report.to_csv())?;
            }
            println!("{}", serde_json::to_string_pretty(&body)?);
            Ok(())
        }
        Command::Inspect { snapshot, query, retrieval_config } => {
            let store = LtmStore::restore(&snapshot)?;
            let query: RetrievalQuery = serde_json::from_str(&query)
                .map_err(|e| Error::Config(format!("cannot parse query JSON: {e}")))?;
            let cfg: RetrievalConfig = load_or_default(&retrieval_config)?;
            cfg.validate()?;
            let result = retrieve(&store, &query, &cfg);
            let breakdowns: Vec<_> = result
                .hits
                .iter()
                .map(|h| score_record(store.get(h.id).expect("hit id exists"), &query, &cfg))
                .collect();
            let trace = serde_json::json!({
                "store_size": store.len(),
                "hits": breakdowns,
                "memory_summary": result.memory_summary,
                "confidence": result.confidence,
            });
            println!("{}", serde_json::to_string_pretty(&trace)?);
            Ok(())
        }
    }
}

/// One sweep cell: a system run under one condition and seed.
#[derive(Debug, Clone, Serialize)]
pub struct RobustnessRow {
    pub system: String,
    pub condition: String,
    pub seed: u64,
    pub accuracy: f64,
}

/// Per-system summary in Table shape: the three condition accuracies (as
/// percentages) plus retention.
#[derive(Debug, Clone, Serialize)]
pub struct SystemSummary {
    pub system: String,
    pub complete: f64,
    pub missing_one: f64,
    pub low_quality: f64,
    pub retention: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RobustnessReport {
    pub systems: Vec<SystemSummary>,
    pub rows: Vec<RobustnessRow>,
}

impl RobustnessReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("system,complete,missing_one,low_quality,retention\n");
        for s in &self.systems {
            out.push_str(&format!(
                "{},{:.2},{:.2},{:.2},{:.2}\n",
                s.system, s.complete, s.missing_one, s.low_quality, s.retention
            ));
        }
        out
    }
}

pub const ROBUSTNESS_CONDITIONS: [ModalityCondition; 3] = [
    ModalityCondition::Complete,
    ModalityCondition::MissingOne,
    ModalityCondition::LowQuality,
];

fn condition_name(c: ModalityCondition) -> &'static str {
    match c {
        ModalityCondition::Complete => "Complete",
        ModalityCondition::MissingOne => "MissingOne",
        ModalityCondition::LowQuality => "LowQuality",
    }
}

/// Run {full, local_only, temporal_context} x {Complete, MissingOne,
/// LowQuality} over `seeds` seeds. Seeds fan out across worker threads and
/// reduce in seed order.
pub fn robustness_report(
    engine_cfg: &EngineConfig,
    base: &ScenarioConfig,
    seeds: u64,
) -> Result<RobustnessReport> {
    let systems = [
        System::Engine(AblationFlags::none()),
        System::LocalOnly,
        System::TemporalContext { k: crate::harness::TEMPORAL_CONTEXT_K },
    ];

    // per_seed[s][system][condition] = accuracy
    let per_seed: Vec<Vec<Vec<f64>>> = parallel_map(seeds as usize, |i| {
        let mut by_system = vec![Vec::new(); systems.len()];
        for condition in ROBUSTNESS_CONDITIONS {
            let cfg = ScenarioConfig {
                seed: base.seed + i as u64,
                modality_condition: condition,
                ..base.clone()
            };
            let corpus = crate::scenario::generate(&cfg)?;
            for (sys_idx, system) in systems.iter().enumerate() {
                let run: ScoredRun = run_system(*system, engine_cfg, &corpus, false)?;
                by_system[sys_idx].push(run.report.accuracy);
            }
        }
        Ok(by_system)
    })?;

    let mut rows = Vec::new();
    let mut summaries = Vec::new();
    for (sys_idx, system) in systems.iter().enumerate() {
        let mut means = [0.0f64; 3];
        for (seed_idx, seed_data) in per_seed.iter().enumerate() {
            for (cond_idx, condition) in ROBUSTNESS_CONDITIONS.iter().enumerate() {
                let accuracy = 100.0 * seed_data[sys_idx][cond_idx];
                means[cond_idx] += accuracy;
                rows.push(RobustnessRow {
                    system: system.name(),
                    condition: condition_name(*condition).into(),
                    seed: base.seed + seed_idx as u64,
                    accuracy,
                });
            }
        }
        for m in &mut means {
            *m /= seeds as f64;
        }
        summaries.push(SystemSummary {
            system: system.name(),
            complete: means[0],
            missing_one: means[1],
            low_quality: means[2],
            retention: retention(means[0], means[1], means[2])?,
        });
    }
    Ok(RobustnessReport { systems: summaries, rows })
}
