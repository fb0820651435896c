//! Procedurally generated tasks with exact ground truth: plotted
//! coordinates, plotted paths, character matrices and corrupted text.

mod campaign;
mod coordinate;
mod ocr;
mod path;
mod plot;
mod raster;
pub mod style;
mod text_matrix;

use std::path::PathBuf;

use crate::model::Task;

pub use campaign::{
    generate_campaign, generate_coordinate, generate_ocr, generate_path, generate_text_matrix,
    plan_coordinate, plan_path, plan_text_matrix, Planned, TEXT_QUESTIONS,
};
pub use coordinate::{gen_coordinate_sample, render_coordinate, CoordinateTaskSpec};
pub use ocr::{bundled_texts, gen_ocr_sample, render_ocr, OcrTaskSpec};
pub use path::{gen_path_sample, render_path, PathTaskSpec};
pub use plot::PlotFrame;
pub use text_matrix::{
    count_occurrences, format_matrix, gen_text_matrix, parse_matrix, TextMatrixSpec,
    BACKGROUND_WORDS,
};

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("invalid task spec: {0}")]
    InvalidSpec(String),
    #[error("point out of range: {0}")]
    OutOfRange(String),
    #[error("target does not fit: {0}")]
    DoesNotFit(String),
    #[error("text of {chars} chars does not fit {max_lines} lines of {per_line}")]
    TooLong {
        chars: usize,
        max_lines: usize,
        per_line: usize,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Image { path: PathBuf, message: String },
}

/// Manifest-relative image location for a generated sample.
pub fn image_rel_path(task: Task, id: &str) -> String {
    format!("images/{}/{id}.png", task.as_str())
}

/// Manifest-relative location of a text-matrix body, keyed by the record's source.
pub fn text_rel_path(source: &str) -> String {
    format!("text/{source}.txt")
}
