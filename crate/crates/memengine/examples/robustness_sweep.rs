//! A small robustness sweep: systems x {Complete, MissingOne, LowQuality},
//! with retention relative to the complete-modality setting.
//!
//! Run: `cargo run --example robustness_sweep`

use memengine::cli::robustness_report;
use memengine::engine::EngineConfig;
use memengine::scenario::ScenarioConfig;

fn main() -> memengine::Result<()> {
    let engine_cfg = EngineConfig::default();
    let scenario = ScenarioConfig { n_dialogues: 25, turns_per_dialogue: 40, seed: 5, ..Default::default() };
    let report = robustness_report(&engine_cfg, &scenario, 4)?;

    println!("{:<22} {:>9} {:>12} {:>12} {:>11}", "system", "complete", "missing one", "low quality", "retention");
    for s in &report.systems {
        println!(
            "{:<22} {:>9.2} {:>12.2} {:>12.2} {:>10.1}%",
            s.system, s.complete, s.missing_one, s.low_quality, s.retention
        );
    }
    println!("\n({} per-seed rows behind the summary)", report.rows.len());
    Ok(())
}
