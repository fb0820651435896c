//! Renders the arrow placeholder over a small position x scale x rotation grid.
//!
//!     cargo run --example variation_grid -- [out_dir]

use std::path::PathBuf;

use v2r::model::{build_variation_space, write_manifest, RunConfig, Task};
use v2r::variation::{enumerate_variants, placeholder, BackgroundBank, EnumerateOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out: PathBuf = std::env::args().nth(1).unwrap_or_else(|| "out/variation_grid".into()).into();
    let config = RunConfig {
        grid: 3,
        scales: vec![0.2, 0.1],
        rotations: vec![0.0, 45.0, 90.0],
        ..RunConfig::default()
    };
    let space = build_variation_space(&config, (672, 672))?;
    let report = enumerate_variants(
        &placeholder::arrow_asset(),
        &BackgroundBank::new(),
        &space,
        &EnumerateOptions {
            task: Task::Direction,
            out_dir: out.clone(),
            master_seed: 7,
            index_offset: 0,
            prompt_id: "direction".into(),
        },
    )?;
    write_manifest(&report.records, &out.join("manifest.jsonl"))?;
    println!("{} variants in the space, {} rendered, {} off-canvas", space.len(), report.records.len(), report.skipped.len());
    for r in report.records.iter().take(5) {
        let v = r.variation.as_ref().unwrap();
        println!("{:<40} rot {:>5} -> {}", r.id, v.rotation, serde_json::to_string(&r.ground_truth)?);
    }
    Ok(())
}
