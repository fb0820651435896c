use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::asset::Asset;
use super::background::BackgroundBank;
use super::compose::{composite, variant_ground_truth};
use super::direction::remap_direction_label;
use super::VariationError;
use crate::model::{sample_seed, Direction, SampleRecord, Task, VariationSpace};

/// Settings shared by every variant of one enumeration.
#[derive(Debug, Clone)]
pub struct EnumerateOptions {
    pub task: Task,
    /// Directory the manifest lives in; image paths are recorded relative to it.
    pub out_dir: PathBuf,
    pub master_seed: u64,
    /// Offset added to the variant index when deriving per-sample seeds.
    pub index_offset: u64,
    pub prompt_id: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SkippedVariant {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct EnumerationReport {
    pub records: Vec<SampleRecord>,
    pub skipped: Vec<SkippedVariant>,
}

impl EnumerationReport {
    pub fn total(&self) -> usize {
        self.records.len() + self.skipped.len()
    }
}

enum Outcome {
    Written(SampleRecord),
    Skipped(SkippedVariant),
}

/// Renders one image and one record per element of `space`.
///
/// Variants whose object would leave the canvas are logged and reported in
/// [`EnumerationReport::skipped`]; every other failure aborts.
pub fn enumerate_variants(
    asset: &Asset,
    bank: &BackgroundBank,
    space: &VariationSpace,
    opts: &EnumerateOptions,
) -> Result<EnumerationReport, VariationError> {
    let canvas = (space.width, space.height);
    let backgrounds = space
        .contexts
        .iter()
        .map(|id| bank.resolve(id).map(|bg| bg.render(canvas.0, canvas.1)))
        .collect::<Result<Vec<_>, _>>()?;

    if opts.task == Task::Direction {
        let _: Direction = asset
            .label()
            .parse()
            .map_err(|_| VariationError::UnknownDirection(asset.label().to_string()))?;
        for r in &space.rotations {
            remap_direction_label(Direction::Up, *r)?;
        }
    }

    let rel_dir = Path::new("images").join(opts.task.as_str());
    let abs_dir = opts.out_dir.join(&rel_dir);
    std::fs::create_dir_all(&abs_dir).map_err(|source| VariationError::Io {
        path: abs_dir.clone(),
        source,
    })?;

    let variants: Vec<_> = space.iter().enumerate().collect();
    let outcomes: Vec<Outcome> = variants
        .into_par_iter()
        .map(|(flat, (idx, v))| -> Result<Outcome, VariationError> {
            let id = format!(
                "{}-{}-p{:02}-s{}-r{}-c{}",
                opts.task, asset.key(), idx.position, idx.scale, idx.rotation, idx.context
            );
            let bg = backgrounds[idx.context].clone();
            let img = match composite(asset, bg, &v, canvas) {
                Ok((img, _)) => img,
                Err(err @ VariationError::OutOfBounds { .. }) => {
                    log::debug!("skipping {id}: {err}");
                    return Ok(Outcome::Skipped(SkippedVariant {
                        id,
                        reason: err.to_string(),
                    }));
                }
                Err(err) => return Err(err),
            };
            let ground_truth = variant_ground_truth(opts.task, asset, v.rotation)?;
            let rel_path = rel_dir.join(format!("{id}.png"));
            let abs_path = opts.out_dir.join(&rel_path);
            img.save(&abs_path).map_err(|e| VariationError::Image {
                path: abs_path.clone(),
                message: e.to_string(),
            })?;
            Ok(Outcome::Written(SampleRecord {
                id,
                task: opts.task,
                image_path: Some(rel_path.to_string_lossy().replace('\\', "/")),
                variation: Some(v),
                ground_truth,
                prompt_id: opts.prompt_id.clone(),
                seed: sample_seed(opts.master_seed, opts.task, opts.index_offset + flat as u64),
                source: Some(asset.key().to_string()),
                params: None,
            }))
        })
        .collect::<Result<_, _>>()?;

    let mut report = EnumerationReport::default();
    for o in outcomes {
        match o {
            Outcome::Written(r) => report.records.push(r),
            Outcome::Skipped(s) => report.skipped.push(s),
        }
    }
    if !report.skipped.is_empty() {
        log::info!(
            "{}: {} of {} variants skipped as out of bounds",
            asset.key(),
            report.skipped.len(),
            report.total()
        );
    }
    Ok(report)
}
