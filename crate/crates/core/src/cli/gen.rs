use std::collections::BTreeMap;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

use super::{io, load_config, usage, CliError, GenArgs, Preset};
use crate::model::{
    build_variation_space, write_manifest_with_header, CampaignConfig, ManifestHeader, RunConfig,
    Task,
};
use crate::synth::{bundled_texts, generate_campaign};
use crate::variation::{
    enumerate_variants, load_asset_dir, placeholder, Asset, BackgroundBank, EnumerateOptions,
    VariationError,
};

pub const MANIFEST_NAME: &str = "manifest.jsonl";

fn smoke_campaign() -> CampaignConfig {
    let full = CampaignConfig::default();
    CampaignConfig {
        coordinate_samples_per_config: 2,
        path_samples_per_config: 2,
        text_sizes: vec![8, 16],
        text_words: vec!["cat".into(), "dog".into()],
        ocr_texts: Some(bundled_texts().into_iter().take(3).collect()),
        ..full
    }
}

/// Hex SHA-256 of the effective configuration in TOML form. The output
/// directory is left out so the same settings hash alike wherever they land.
pub fn config_hash(config: &RunConfig) -> String {
    let mut config = config.clone();
    config.output_dir = PathBuf::new();
    let text = toml::to_string(&config).expect("config serializes");
    format!("{:x}", Sha256::digest(text.as_bytes()))
}

fn assets_for(task: Task, args: &GenArgs, config: &RunConfig) -> Result<Vec<Asset>, CliError> {
    if let Some(root) = &args.assets {
        let assets = load_asset_dir(root, task).map_err(|e| match e {
            VariationError::Io { .. } => io(e),
            _ => usage(e),
        })?;
        if assets.is_empty() {
            return Err(usage(format!("no {task} assets under {}", root.display())));
        }
        return Ok(assets);
    }
    Ok(match task {
        Task::Direction => vec![placeholder::arrow_asset()],
        _ => {
            let all = placeholder::object_assets();
            let mut picked = Vec::new();
            for class in &config.classes {
                match all.iter().find(|a| a.label() == class) {
                    Some(a) => picked.push(a.clone()),
                    None => {
                        return Err(usage(format!(
                            "no built-in placeholder for class `{class}`; pass --assets"
                        )))
                    }
                }
            }
            picked
        }
    })
}

pub fn run(args: GenArgs) -> Result<(), CliError> {
    if args.tasks.is_empty() {
        return Err(usage("at least one --task is required"));
    }
    if args.tasks.contains(&Task::ExtendedBenchmark) {
        return Err(usage("extended-benchmark records are imported, not generated"));
    }
    let mut config = load_config(args.config.as_ref())?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(grid) = args.grid {
        config.grid = grid;
    }
    if let Some(out) = &args.out {
        config.output_dir = out.clone();
    }
    match args.preset {
        Some(Preset::Paper) => config.campaign = CampaignConfig::default(),
        Some(Preset::Smoke) => config.campaign = smoke_campaign(),
        None => {}
    }
    config.validate().map_err(usage)?;
    let out = config.output_dir.clone();
    std::fs::create_dir_all(&out).map_err(|e| io(format!("{}: {e}", out.display())))?;

    let canvas = (config.canvas[0], config.canvas[1]);
    let mut records = Vec::new();
    let mut counts: BTreeMap<Task, (usize, usize)> = BTreeMap::new();
    let variant_tasks: Vec<Task> = Task::ALL
        .into_iter()
        .filter(|t| matches!(t, Task::Object | Task::Direction) && args.tasks.contains(t))
        .collect();
    if !variant_tasks.is_empty() {
        let space = build_variation_space(&config, canvas).map_err(usage)?;
        let mut bank = BackgroundBank::new();
        if let Some(root) = &args.backgrounds {
            bank.load_images(root).map_err(io)?;
        }
        for task in variant_tasks {
            let mut offset = 0u64;
            for asset in assets_for(task, &args, &config)? {
                let opts = EnumerateOptions {
                    task,
                    out_dir: out.clone(),
                    master_seed: config.seed,
                    index_offset: offset,
                    prompt_id: task.as_str().to_string(),
                };
                let rep = enumerate_variants(&asset, &bank, &space, &opts).map_err(|e| match e {
                    VariationError::Io { .. } | VariationError::Image { .. } => io(e),
                    _ => usage(e),
                })?;
                offset += space.len() as u64;
                let c = counts.entry(task).or_default();
                c.0 += rep.records.len();
                c.1 += rep.skipped.len();
                records.extend(rep.records);
            }
        }
    }
    let synthetic: Vec<Task> = args
        .tasks
        .iter()
        .copied()
        .filter(|t| !matches!(t, Task::Object | Task::Direction))
        .collect();
    if !synthetic.is_empty() {
        let batch = generate_campaign(&config.campaign, &synthetic, config.seed, &out).map_err(|e| {
            use crate::synth::SynthError;
            match e {
                SynthError::Io { .. } | SynthError::Image { .. } => io(e),
                _ => usage(e),
            }
        })?;
        for r in &batch {
            counts.entry(r.task).or_default().0 += 1;
        }
        records.extend(batch);
    }

    let header = ManifestHeader {
        v2r_manifest: 1,
        canvas: config.canvas,
        seed: config.seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_hash: config_hash(&config),
    };
    let path = out.join(MANIFEST_NAME);
    write_manifest_with_header(&header, &records, &path).map_err(io)?;
    for (task, (written, skipped)) in &counts {
        if *skipped > 0 {
            println!("{task}: {written} records ({skipped} variants skipped out of bounds)");
        } else {
            println!("{task}: {written} records");
        }
    }
    println!("wrote {} records to {}", records.len(), path.display());
    Ok(())
}
