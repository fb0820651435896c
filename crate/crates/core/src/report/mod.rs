//! Joins model outputs with the manifest and writes the scored report.

mod score;
mod write;

pub use score::{
    score, CurvePoint, DimensionReport, HeatCell, InputFile, OcrSummary, PathSummary, Report, ReportMetadata,
    ScoreOptions, Slice, TaskReport, DIMENSIONS,
};
pub use write::{write_report, REPORT_FILES};

use std::path::PathBuf;

use crate::metrics::MetricError;

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("output for unknown sample id `{0}`")]
    UnknownSample(String),
    #[error("model `{model}` has more than one output for `{id}`")]
    DuplicateOutput { model: String, id: String },
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Csv { path: PathBuf, message: String },
}
