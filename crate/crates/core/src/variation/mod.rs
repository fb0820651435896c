//! Position, scale, orientation and context transforms of a foreground
//! asset over a background.

mod asset;
mod background;
mod compose;
mod direction;
mod enumerate;
pub mod placeholder;

use std::path::PathBuf;

pub use asset::{load_asset_dir, tight_box, Asset, PixelBox};
pub use background::{Background, BackgroundBank, BackgroundKind};
pub use compose::{
    apply_variation, object_box, plan_placement, scaled_size, variant_ground_truth, Placement,
};
pub use direction::remap_direction_label;
pub use enumerate::{enumerate_variants, EnumerateOptions, EnumerationReport, SkippedVariant};

use crate::model::Task;

#[derive(Debug, thiserror::Error)]
pub enum VariationError {
    #[error("object of extent {extent:?} at anchor {anchor:?} leaves the {canvas:?} canvas")]
    OutOfBounds {
        anchor: (f64, f64),
        extent: (f64, f64),
        canvas: (u32, u32),
    },
    #[error("unknown background id `{0}`")]
    UnknownBackground(String),
    #[error("direction assets need rotations that are multiples of 45 degrees, got {0}")]
    DirectionRotation(f64),
    #[error("asset label `{0}` is not one of the eight directions")]
    UnknownDirection(String),
    #[error("invalid variation: {0}")]
    InvalidVariation(String),
    #[error("asset `{key}`: {reason}")]
    InvalidAsset { key: String, reason: String },
    #[error("task `{0}` is not rendered from assets")]
    UnsupportedTask(Task),
    #[error("{path}: {message}")]
    Image { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}
