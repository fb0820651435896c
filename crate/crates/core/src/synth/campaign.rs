use std::path::Path;

use image::RgbImage;
use rayon::prelude::*;

use super::coordinate::{gen_coordinate_sample, CoordinateTaskSpec};
use super::ocr::{bundled_texts, gen_ocr_sample, OcrTaskSpec};
use super::path::{gen_path_sample, PathTaskSpec};
use super::text_matrix::{gen_text_matrix, TextMatrixSpec};
use super::{text_rel_path, SynthError};
use crate::model::{rng_from_seed, sample_seed, CampaignConfig, SampleRecord, Task};

/// Prompt ids asked of every text matrix: the word, its position, its count.
pub const TEXT_QUESTIONS: [&str; 3] = ["text-word", "text-position", "text-count"];

fn create_dir(dir: &Path) -> Result<(), SynthError> {
    std::fs::create_dir_all(dir).map_err(|source| SynthError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn save(out_dir: &Path, img: &RgbImage, record: &SampleRecord) -> Result<(), SynthError> {
    let rel = record.image_path.as_deref().expect("image task");
    let path = out_dir.join(rel);
    if let Some(parent) = path.parent() {
        create_dir(parent)?;
    }
    img.save(&path).map_err(|e| SynthError::Image {
        path,
        message: e.to_string(),
    })
}

/// Renders jobs in parallel, saving images and returning records in job order.
fn render_all<T, F>(out_dir: &Path, jobs: Vec<T>, render: F) -> Result<Vec<SampleRecord>, SynthError>
where
    T: Send,
    F: Fn(T) -> Result<(RgbImage, SampleRecord), SynthError> + Sync,
{
    jobs.into_par_iter()
        .map(|job| {
            let (img, record) = render(job)?;
            save(out_dir, &img, &record)?;
            Ok(record)
        })
        .collect()
}

/// One planned sample: id, per-sample seed and the sampled task spec.
#[derive(Debug, Clone, PartialEq)]
pub struct Planned<S> {
    pub id: String,
    pub seed: u64,
    pub spec: S,
}

/// Every (range, dims, grid, reference lines) configuration, each with
/// `coordinate_samples_per_config` random points.
pub fn plan_coordinate(cfg: &CampaignConfig, master_seed: u64) -> Vec<Planned<CoordinateTaskSpec>> {
    let mut jobs = Vec::new();
    for (ri, range) in cfg.ranges.iter().enumerate() {
        for &dims in &cfg.coordinate_dims {
            for grid in [false, true] {
                for refs in [false, true] {
                    for k in 0..cfg.coordinate_samples_per_config {
                        let id = format!(
                            "coordinate-d{dims}-r{ri}-g{}-l{}-{k:03}",
                            u8::from(grid),
                            u8::from(refs)
                        );
                        let seed = sample_seed(master_seed, Task::Coordinate, jobs.len() as u64);
                        let spec = CoordinateTaskSpec::sample(dims, *range, grid, refs, &mut rng_from_seed(seed));
                        jobs.push(Planned { id, seed, spec });
                    }
                }
            }
        }
    }
    jobs
}

pub fn generate_coordinate(
    cfg: &CampaignConfig,
    master_seed: u64,
    out_dir: &Path,
) -> Result<Vec<SampleRecord>, SynthError> {
    render_all(out_dir, plan_coordinate(cfg, master_seed), |j| {
        gen_coordinate_sample(&j.spec, j.seed, &j.id)
    })
}

/// Every (point count, range) configuration, each with
/// `path_samples_per_config` random paths.
pub fn plan_path(cfg: &CampaignConfig, master_seed: u64) -> Vec<Planned<PathTaskSpec>> {
    let mut jobs = Vec::new();
    for &n in &cfg.path_point_counts {
        for (ri, range) in cfg.ranges.iter().enumerate() {
            for k in 0..cfg.path_samples_per_config {
                let id = format!("path-n{n}-r{ri}-{k:03}");
                let seed = sample_seed(master_seed, Task::Path, jobs.len() as u64);
                let spec = PathTaskSpec::sample(n, *range, &mut rng_from_seed(seed));
                jobs.push(Planned { id, seed, spec });
            }
        }
    }
    jobs
}

pub fn generate_path(
    cfg: &CampaignConfig,
    master_seed: u64,
    out_dir: &Path,
) -> Result<Vec<SampleRecord>, SynthError> {
    render_all(out_dir, plan_path(cfg, master_seed), |j| gen_path_sample(&j.spec, j.seed, &j.id))
}

/// One matrix per (size, word, background, sample); the id is the matrix source.
pub fn plan_text_matrix(cfg: &CampaignConfig, master_seed: u64) -> Vec<Planned<TextMatrixSpec>> {
    let mut jobs = Vec::new();
    for &size in &cfg.text_sizes {
        for word in &cfg.text_words {
            for (bi, &background) in cfg.text_backgrounds.iter().enumerate() {
                for k in 0..cfg.text_samples_per_config {
                    let id = format!("text-s{size}-{word}-b{bi}-{k:03}");
                    let seed = sample_seed(master_seed, Task::TextMatrix, jobs.len() as u64);
                    let spec = TextMatrixSpec::sample(size, word, background, &mut rng_from_seed(seed));
                    jobs.push(Planned { id, seed, spec });
                }
            }
        }
    }
    jobs
}

/// Writes each planned matrix once and asks it the three [`TEXT_QUESTIONS`].
pub fn generate_text_matrix(
    cfg: &CampaignConfig,
    master_seed: u64,
    out_dir: &Path,
) -> Result<Vec<SampleRecord>, SynthError> {
    create_dir(&out_dir.join("text"))?;
    let mut records = Vec::new();
    for job in plan_text_matrix(cfg, master_seed) {
        let (body, base) = gen_text_matrix(&job.spec, job.seed, &job.id)?;
        let path = out_dir.join(text_rel_path(&job.id));
        std::fs::write(&path, body + "\n").map_err(|source| SynthError::Io { path, source })?;
        for q in TEXT_QUESTIONS {
            let mut r = base.clone();
            r.id = format!("{}-{}", job.id, q.trim_start_matches("text-"));
            r.prompt_id = q.to_string();
            records.push(r);
        }
    }
    Ok(records)
}

/// Each source sentence gets one replacement set, rendered at every blur
/// level so that blur is the only factor varying within a source.
pub fn generate_ocr(
    cfg: &CampaignConfig,
    master_seed: u64,
    out_dir: &Path,
) -> Result<Vec<SampleRecord>, SynthError> {
    let texts = cfg.ocr_texts.clone().unwrap_or_else(bundled_texts);
    let mut jobs = Vec::new();
    for (ti, text) in texts.iter().enumerate() {
        let base_seed = sample_seed(master_seed, Task::Ocr, ti as u64);
        let base = OcrTaskSpec::sample(
            text,
            cfg.ocr_replacements,
            crate::model::BlurLevel::B0,
            &mut rng_from_seed(base_seed),
        )?;
        for (bi, &blur) in cfg.ocr_blur_levels.iter().enumerate() {
            let spec = OcrTaskSpec {
                blur,
                ..base.clone()
            };
            jobs.push((format!("ocr-t{ti:02}-b{bi}"), format!("ocr-t{ti:02}"), base_seed, spec));
        }
    }
    render_all(out_dir, jobs, |(id, source, seed, spec)| {
        let (img, mut record) = gen_ocr_sample(&spec, seed, &id)?;
        record.source = Some(source);
        Ok((img, record))
    })
}

/// Generates the requested tasks in a fixed order; non-synthetic tasks are ignored.
pub fn generate_campaign(
    cfg: &CampaignConfig,
    tasks: &[Task],
    master_seed: u64,
    out_dir: &Path,
) -> Result<Vec<SampleRecord>, SynthError> {
    let mut records = Vec::new();
    for task in Task::ALL {
        if !tasks.contains(&task) {
            continue;
        }
        let batch = match task {
            Task::Coordinate => generate_coordinate(cfg, master_seed, out_dir)?,
            Task::Path => generate_path(cfg, master_seed, out_dir)?,
            Task::TextMatrix => generate_text_matrix(cfg, master_seed, out_dir)?,
            Task::Ocr => generate_ocr(cfg, master_seed, out_dir)?,
            _ => continue,
        };
        log::info!("generated {} {task} samples", batch.len());
        records.extend(batch);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BlurLevel, PlotRange, TextBackground};

    fn small() -> CampaignConfig {
        CampaignConfig {
            ranges: vec![PlotRange { lo: 0, hi: 10 }],
            coordinate_dims: vec![1, 2],
            coordinate_samples_per_config: 2,
            path_point_counts: vec![2, 3],
            path_samples_per_config: 2,
            text_sizes: vec![8],
            text_words: vec!["cat".into(), "dog".into()],
            text_backgrounds: vec![TextBackground::Asterisks, TextBackground::RandomWords],
            text_samples_per_config: 1,
            ocr_texts: Some(vec!["hello there world".into()]),
            ocr_replacements: 2,
            ocr_blur_levels: vec![BlurLevel::B0, BlurLevel::B2],
        }
    }

    #[test]
    fn preset_counts() {
        let cfg = CampaignConfig::default();
        // 4 ranges x 2 dims x grid on/off x reference lines on/off
        let coord = plan_coordinate(&cfg, 1);
        assert_eq!(coord.len(), 32 * cfg.coordinate_samples_per_config);
        assert_eq!(plan_path(&cfg, 1).len(), 2000);
        assert_eq!(plan_text_matrix(&cfg, 1).len(), 6 * 8 * 2);
    }

    #[test]
    fn small_campaign_is_complete_and_reproducible() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let tasks = [Task::Coordinate, Task::Path, Task::TextMatrix, Task::Ocr];
        let ra = generate_campaign(&small(), &tasks, 3, a.path()).unwrap();
        let rb = generate_campaign(&small(), &tasks, 3, b.path()).unwrap();
        assert_eq!(ra, rb);
        let count = |t: Task| ra.iter().filter(|r| r.task == t).count();
        assert_eq!(count(Task::Coordinate), 2 * 4 * 2);
        assert_eq!(count(Task::Path), 2 * 2);
        assert_eq!(count(Task::TextMatrix), 2 * 2 * 3);
        assert_eq!(count(Task::Ocr), 2);
        for r in &ra {
            r.validate().unwrap();
            if let Some(p) = &r.image_path {
                let x = std::fs::read(a.path().join(p)).unwrap();
                let y = std::fs::read(b.path().join(p)).unwrap();
                assert_eq!(x, y, "{p}");
            } else {
                assert!(a.path().join(text_rel_path(r.source.as_ref().unwrap())).exists());
            }
        }
        let ocr: Vec<_> = ra.iter().filter(|r| r.task == Task::Ocr).collect();
        assert_eq!(ocr[0].ground_truth, ocr[1].ground_truth);
        assert_eq!(ocr[0].source, ocr[1].source);
    }
}
