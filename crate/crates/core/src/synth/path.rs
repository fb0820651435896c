use image::RgbImage;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::plot::PlotFrame;
use super::{image_rel_path, raster, style, SynthError};
use crate::model::{GroundTruth, PlotRange, Point, SampleRecord, Task, TaskParams};

/// One path-tracing plot: a polyline through integer points, start marked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathTaskSpec {
    pub range: PlotRange,
    pub points: Vec<Point>,
}

impl PathTaskSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        if !self.range.is_supported() {
            return Err(SynthError::InvalidSpec(format!("unsupported range {}", self.range)));
        }
        if !(2..=6).contains(&self.points.len()) {
            return Err(SynthError::InvalidSpec(format!(
                "point count {} outside [2, 6]",
                self.points.len()
            )));
        }
        for p in &self.points {
            if p.dims() != 2 || !p.0.iter().all(|c| self.range.contains(*c)) {
                return Err(SynthError::OutOfRange(format!("{p} outside {}", self.range)));
            }
        }
        if let Some(w) = self.points.windows(2).find(|w| w[0] == w[1]) {
            return Err(SynthError::InvalidSpec(format!(
                "consecutive repeated point {}",
                w[0]
            )));
        }
        Ok(())
    }

    /// Uniform integer points without consecutive repeats.
    pub fn sample<R: Rng>(n: usize, range: PlotRange, rng: &mut R) -> Self {
        let mut points: Vec<Point> = Vec::with_capacity(n);
        while points.len() < n {
            let p = Point::new2(
                rng.gen_range(range.lo..=range.hi),
                rng.gen_range(range.lo..=range.hi),
            );
            if points.last() != Some(&p) {
                points.push(p);
            }
        }
        PathTaskSpec { range, points }
    }

    pub fn frame(&self) -> PlotFrame {
        PlotFrame::new(2, self.range)
    }
}

pub fn render_path(spec: &PathTaskSpec) -> Result<RgbImage, SynthError> {
    spec.validate()?;
    let frame = spec.frame();
    let mut img = frame.blank();
    frame.draw_grid(&mut img);
    frame.draw_axes(&mut img);
    let px: Vec<(f64, f64)> = spec
        .points
        .iter()
        .map(|p| frame.to_pixel(&[p.0[0] as f64, p.0[1] as f64]))
        .collect();
    for w in px.windows(2) {
        let a = (w[0].0 as f32, w[0].1 as f32);
        let b = (w[1].0 as f32, w[1].1 as f32);
        raster::thick_line(&mut img, a, b, style::PATH_LINE_HALF_WIDTH, style::PATH_LINE);
    }
    for p in &px[1..] {
        raster::marker(&mut img, *p, style::VERTEX_RADIUS, style::VERTEX);
    }
    raster::marker(&mut img, px[0], style::START_RADIUS, style::START);
    Ok(img)
}

/// Renders the path; the ground truth is the ordered point list.
pub fn gen_path_sample(
    spec: &PathTaskSpec,
    seed: u64,
    id: &str,
) -> Result<(RgbImage, SampleRecord), SynthError> {
    let img = render_path(spec)?;
    let record = SampleRecord {
        id: id.to_string(),
        task: Task::Path,
        image_path: Some(image_rel_path(Task::Path, id)),
        variation: None,
        ground_truth: GroundTruth::Path(spec.points.clone()),
        prompt_id: Task::Path.to_string(),
        seed,
        source: Some(id.to_string()),
        params: Some(TaskParams::Path {
            n: spec.points.len(),
            range: spec.range,
        }),
    };
    Ok((img, record))
}
