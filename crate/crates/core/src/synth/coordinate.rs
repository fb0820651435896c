use image::RgbImage;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::plot::PlotFrame;
use super::{image_rel_path, raster, style, SynthError};
use crate::model::{GroundTruth, PlotRange, Point, SampleRecord, Task, TaskParams};

/// One coordinate-identification plot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinateTaskSpec {
    pub dims: u8,
    pub range: PlotRange,
    pub reference_lines: bool,
    pub grid: bool,
    pub point: Point,
}

impl CoordinateTaskSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        if !matches!(self.dims, 1 | 2) {
            return Err(SynthError::InvalidSpec(format!(
                "dimensionality {} unsupported (1 or 2)",
                self.dims
            )));
        }
        if !self.range.is_supported() {
            return Err(SynthError::InvalidSpec(format!("unsupported range {}", self.range)));
        }
        if self.point.dims() != self.dims as usize {
            return Err(SynthError::InvalidSpec(format!(
                "point {} does not have {} components",
                self.point, self.dims
            )));
        }
        if let Some(c) = self.point.0.iter().find(|c| !self.range.contains(**c)) {
            return Err(SynthError::OutOfRange(format!(
                "component {c} of {} outside {}",
                self.point, self.range
            )));
        }
        Ok(())
    }

    /// Uniform integer point in the range.
    pub fn sample<R: Rng>(dims: u8, range: PlotRange, grid: bool, reference_lines: bool, rng: &mut R) -> Self {
        let point = Point((0..dims).map(|_| rng.gen_range(range.lo..=range.hi)).collect());
        CoordinateTaskSpec {
            dims,
            range,
            reference_lines,
            grid,
            point,
        }
    }

    pub fn frame(&self) -> PlotFrame {
        PlotFrame::new(self.dims, self.range)
    }
}

pub fn render_coordinate(spec: &CoordinateTaskSpec) -> Result<RgbImage, SynthError> {
    spec.validate()?;
    let frame = spec.frame();
    let mut img = frame.blank();
    if spec.grid {
        frame.draw_grid(&mut img);
    }
    frame.draw_axes(&mut img);
    let p: Vec<f64> = spec.point.0.iter().map(|c| *c as f64).collect();
    if spec.reference_lines {
        frame.draw_reference_lines(&mut img, &p);
    }
    raster::marker(&mut img, frame.to_pixel(&p), style::POINT_RADIUS, style::POINT);
    Ok(img)
}

/// Renders the plot; the ground truth is the sampled point.
pub fn gen_coordinate_sample(
    spec: &CoordinateTaskSpec,
    seed: u64,
    id: &str,
) -> Result<(RgbImage, SampleRecord), SynthError> {
    let img = render_coordinate(spec)?;
    let record = SampleRecord {
        id: id.to_string(),
        task: Task::Coordinate,
        image_path: Some(image_rel_path(Task::Coordinate, id)),
        variation: None,
        ground_truth: GroundTruth::Coordinate(spec.point.clone()),
        prompt_id: Task::Coordinate.to_string(),
        seed,
        source: Some(id.to_string()),
        params: Some(TaskParams::Coordinate {
            dims: spec.dims,
            range: spec.range,
            grid: spec.grid,
            reference_lines: spec.reference_lines,
        }),
    };
    Ok((img, record))
}
