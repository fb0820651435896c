use std::path::{Path, PathBuf};

use image::RgbaImage;

use super::VariationError;
use crate::model::Task;

/// Axis-aligned pixel box, `x1`/`y1` exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelBox {
    pub x0: u32,
    pub y0: u32,
    pub x1: u32,
    pub y1: u32,
}

impl PixelBox {
    pub fn width(&self) -> u32 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> u32 {
        self.y1 - self.y0
    }

    pub fn longer_side(&self) -> u32 {
        self.width().max(self.height())
    }

    pub fn center(&self) -> (f64, f64) {
        (
            (self.x0 + self.x1) as f64 / 2.0,
            (self.y0 + self.y1) as f64 / 2.0,
        )
    }
}

/// Smallest box containing every pixel for which `keep` holds.
pub fn tight_box<P: image::Pixel>(
    img: &image::ImageBuffer<P, Vec<P::Subpixel>>,
    keep: impl Fn(&P) -> bool,
) -> Option<PixelBox> {
    let mut bbox: Option<PixelBox> = None;
    for (x, y, p) in img.enumerate_pixels() {
        if keep(p) {
            let b = bbox.get_or_insert(PixelBox {
                x0: x,
                y0: y,
                x1: x + 1,
                y1: y + 1,
            });
            b.x0 = b.x0.min(x);
            b.y0 = b.y0.min(y);
            b.x1 = b.x1.max(x + 1);
            b.y1 = b.y1.max(y + 1);
        }
    }
    bbox
}

/// A transparent-background foreground with its intrinsic label.
///
/// The pixel buffer is stored cropped to the tight box of non-transparent
/// pixels, so the buffer dimensions are the tight-box dimensions.
#[derive(Debug, Clone)]
pub struct Asset {
    label: String,
    key: String,
    pixels: RgbaImage,
    source_box: PixelBox,
}

impl Asset {
    pub fn new(
        label: impl Into<String>,
        key: impl Into<String>,
        image: RgbaImage,
    ) -> Result<Self, VariationError> {
        let label = label.into();
        let key = key.into();
        if label.trim().is_empty() {
            return Err(VariationError::InvalidAsset {
                key,
                reason: "empty label".into(),
            });
        }
        let bbox = tight_box(&image, |p| p.0[3] > 0).ok_or_else(|| VariationError::InvalidAsset {
            key: key.clone(),
            reason: "no opaque pixels".into(),
        })?;
        let pixels =
            image::imageops::crop_imm(&image, bbox.x0, bbox.y0, bbox.width(), bbox.height())
                .to_image();
        Ok(Asset {
            label,
            key,
            pixels,
            source_box: bbox,
        })
    }

    pub fn load(label: &str, key: &str, path: &Path) -> Result<Self, VariationError> {
        let image = image::open(path)
            .map_err(|e| VariationError::Image {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?
            .to_rgba8();
        Self::new(label, key, image)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// File-name-safe identifier, unique within a bank.
    pub fn key(&self) -> &str {
        &self.key
    }

    pub fn pixels(&self) -> &RgbaImage {
        &self.pixels
    }

    /// Tight box within the image the asset was built from.
    pub fn source_box(&self) -> PixelBox {
        self.source_box
    }
}

/// Lowercase alphanumerics with `_` for everything else.
pub(crate) fn sanitize_key(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '_'
            }
        })
        .collect()
}

/// Loads `<root>/<task>/<label>/<name>.png`, sorted by label then name.
pub fn load_asset_dir(root: &Path, task: Task) -> Result<Vec<Asset>, VariationError> {
    let task_dir = root.join(task.as_str());
    let read_sorted = |dir: &Path| -> Result<Vec<PathBuf>, VariationError> {
        let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
            .map_err(|e| VariationError::Io {
                path: dir.to_path_buf(),
                source: e,
            })?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .collect();
        entries.sort();
        Ok(entries)
    };
    let mut assets = Vec::new();
    for label_dir in read_sorted(&task_dir)? {
        if !label_dir.is_dir() {
            continue;
        }
        let label = label_dir.file_name().unwrap().to_string_lossy().to_string();
        for file in read_sorted(&label_dir)? {
            if file.extension().and_then(|e| e.to_str()) != Some("png") {
                continue;
            }
            let stem = file.file_stem().unwrap().to_string_lossy();
            let key = sanitize_key(&format!("{label}-{stem}"));
            assets.push(Asset::load(&label, &key, &file)?);
        }
    }
    Ok(assets)
}
