//! Shared domain types: variations, sample records, run configuration,
//! seed derivation and the line-delimited manifest.

mod config;
mod manifest;
mod record;
mod seed;
mod space;

pub use config::{
    CampaignConfig, ConfigError, RunConfig, Weights, DEFAULT_CLASSES, TEXT_MATRIX_SIZES,
    TEXT_MATRIX_WORDS,
};
pub use manifest::{
    read_manifest, read_manifest_full, write_manifest, write_manifest_with_header, Manifest,
    ManifestError, ManifestHeader,
};
pub use record::{
    format_path, BlurLevel, Direction, GroundTruth, PlotRange, Point, RecordError, Replacement,
    SampleRecord,
    Task, TaskParams, TextBackground,
};
pub(crate) use record::apply_replacements;
pub use seed::{rng_from_seed, sample_seed};
pub use space::{
    build_variation_space, Anchor, SpaceError, VariantIndex, Variation, VariationSpace,
};
