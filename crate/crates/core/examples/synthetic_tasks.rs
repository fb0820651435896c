//! Generates a handful of coordinate, path, text-matrix and corrupted-text samples.
//!
//!     cargo run --example synthetic_tasks -- [out_dir]

use std::path::PathBuf;

use v2r::model::{write_manifest, CampaignConfig, Task};
use v2r::synth::{bundled_texts, generate_campaign};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "out/synthetic".into()).into();
    let cfg = CampaignConfig {
        coordinate_samples_per_config: 1,
        path_samples_per_config: 1,
        text_sizes: vec![8],
        text_words: vec!["cat".into()],
        ocr_texts: Some(bundled_texts().into_iter().take(1).collect()),
        ..CampaignConfig::default()
    };
    let tasks = [Task::Coordinate, Task::Path, Task::TextMatrix, Task::Ocr];
    let records = generate_campaign(&cfg, &tasks, 7, &out)?;
    write_manifest(&records, &out.join("manifest.jsonl"))?;
    for task in tasks {
        let of_task: Vec<_> = records.iter().filter(|r| r.task == task).collect();
        println!("{task}: {} records, e.g. {} -> {}", of_task.len(), of_task[0].id, serde_json::to_string(&of_task[0].ground_truth)?);
    }
    println!("written under {}", out.display());
    Ok(())
}
