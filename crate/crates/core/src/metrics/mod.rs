//! Robustness and task metrics: consistency across variations, semantic and
//! token-level output stability, path/point accuracy, positional bias,
//! corrupted-text fidelity and judge scoring.

mod consistency;
mod judge;
mod ocr;
mod path;
mod region;
mod stability;

pub use consistency::{aggregate_robustness, consistency, StabilityScores};
pub use judge::{llm_judge, parse_judge_verdict, JudgeRubric};
pub use ocr::{ocr_fidelity, OcrFidelity};
pub use path::{path_metrics, point_accuracy, positional_accuracy_curve, PathEval};
pub use region::{is_middle_cell, region_bias, region_bias_partial, RegionBias};
pub use stability::{
    cosine, jaccard, semantic_stability, semantic_stability_vectors, token_set, token_stability,
    token_stability_sets, Embedder, HashedBagOfWords,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricError {
    #[error("{0} needs at least one value")]
    Empty(&'static str),
    #[error("value {value} at index {index} lies outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },
    #[error("length mismatch: {0} predictions vs {1} ground truths")]
    LengthMismatch(usize, usize),
    #[error("embeddings have different dimensions ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("embedding of `{id}` is zero or not finite")]
    DegenerateEmbedding { id: String },
    #[error("embedding `{id}` failed: {message}")]
    Embedding { id: String, message: String },
    #[error("region map must be square with side >= 3, got {rows}x{cols}")]
    RegionGrid { rows: usize, cols: usize },
    #[error("no component present to aggregate")]
    NothingToAggregate,
    #[error("invalid weights: {0}")]
    Weights(String),
}
