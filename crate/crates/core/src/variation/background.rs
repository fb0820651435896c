use std::collections::BTreeMap;
use std::path::Path;

use image::{imageops, Rgb, RgbImage, Rgba, RgbaImage};

use super::VariationError;

const NAMED_COLORS: [(&str, [u8; 3]); 8] = [
    ("white", [255, 255, 255]),
    ("black", [0, 0, 0]),
    ("gray", [128, 128, 128]),
    ("red", [220, 40, 40]),
    ("green", [40, 160, 60]),
    ("blue", [40, 80, 220]),
    ("yellow", [240, 220, 60]),
    ("sky", [150, 200, 240]),
];

#[derive(Debug, Clone)]
pub enum BackgroundKind {
    Solid(Rgb<u8>),
    Image(RgbImage),
}

#[derive(Debug, Clone)]
pub struct Background {
    pub id: String,
    pub kind: BackgroundKind,
}

impl Background {
    pub fn solid(id: impl Into<String>, color: [u8; 3]) -> Self {
        Background {
            id: id.into(),
            kind: BackgroundKind::Solid(Rgb(color)),
        }
    }

    /// Image backgrounds are flattened onto white if they carry alpha.
    pub fn image(id: impl Into<String>, image: &RgbaImage) -> Self {
        let mut flat = RgbImage::new(image.width(), image.height());
        for (x, y, p) in image.enumerate_pixels() {
            let Rgba([r, g, b, a]) = *p;
            let a = a as u32;
            let mix = |c: u8| ((c as u32 * a + 255 * (255 - a) + 127) / 255) as u8;
            flat.put_pixel(x, y, Rgb([mix(r), mix(g), mix(b)]));
        }
        Background {
            id: id.into(),
            kind: BackgroundKind::Image(flat),
        }
    }

    /// Background at canvas size; images are scaled to cover and center-cropped.
    pub fn render(&self, width: u32, height: u32) -> RgbImage {
        match &self.kind {
            BackgroundKind::Solid(c) => RgbImage::from_pixel(width, height, *c),
            BackgroundKind::Image(img) => {
                if img.dimensions() == (width, height) {
                    return img.clone();
                }
                let (w, h) = img.dimensions();
                let ratio = (width as f64 / w as f64).max(height as f64 / h as f64);
                let nw = ((w as f64 * ratio).ceil() as u32).max(width);
                let nh = ((h as f64 * ratio).ceil() as u32).max(height);
                let resized = imageops::resize(img, nw, nh, imageops::FilterType::Triangle);
                imageops::crop_imm(&resized, (nw - width) / 2, (nh - height) / 2, width, height)
                    .to_image()
            }
        }
    }

    pub fn solid_color(&self) -> Option<Rgb<u8>> {
        match self.kind {
            BackgroundKind::Solid(c) => Some(c),
            BackgroundKind::Image(_) => None,
        }
    }
}

fn parse_hex(hex: &str) -> Option<[u8; 3]> {
    if hex.len() != 6 || !hex.is_ascii() {
        return None;
    }
    let byte = |i: usize| u8::from_str_radix(&hex[i..i + 2], 16).ok();
    Some([byte(0)?, byte(2)?, byte(4)?])
}

/// Background lookup by context id.
///
/// Ids are `solid/<rrggbb>`, one of the named colors (`white`, `black`, ...),
/// or `image/<stem>` for files under `backgrounds/images/`.
#[derive(Debug, Clone, Default)]
pub struct BackgroundBank {
    entries: BTreeMap<String, Background>,
}

impl BackgroundBank {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, bg: Background) {
        self.entries.insert(bg.id.clone(), bg);
    }

    /// Resolves virtual solid-color ids on demand; image ids must be inserted
    /// or loaded first.
    pub fn resolve(&self, id: &str) -> Result<Background, VariationError> {
        if let Some(bg) = self.entries.get(id) {
            return Ok(bg.clone());
        }
        if let Some((_, rgb)) = NAMED_COLORS.iter().find(|(name, _)| *name == id) {
            return Ok(Background::solid(id, *rgb));
        }
        if let Some(rgb) = id.strip_prefix("solid/").and_then(parse_hex) {
            return Ok(Background::solid(id, rgb));
        }
        Err(VariationError::UnknownBackground(id.to_string()))
    }

    /// Loads every image in `<root>/images/` as `image/<stem>`.
    pub fn load_images(&mut self, root: &Path) -> Result<usize, VariationError> {
        let dir = root.join("images");
        let mut files: Vec<_> = std::fs::read_dir(&dir)
            .map_err(|source| VariationError::Io {
                path: dir.clone(),
                source,
            })?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        files.sort();
        let mut count = 0;
        for path in files {
            let img = match image::open(&path) {
                Ok(img) => img.to_rgba8(),
                Err(e) => {
                    log::warn!("skipping background {}: {e}", path.display());
                    continue;
                }
            };
            let stem = path.file_stem().unwrap().to_string_lossy();
            self.insert(Background::image(format!("image/{stem}"), &img));
            count += 1;
        }
        Ok(count)
    }

    /// Ids of every loaded image background.
    pub fn image_ids(&self) -> Vec<String> {
        self.entries
            .values()
            .filter(|b| matches!(b.kind, BackgroundKind::Image(_)))
            .map(|b| b.id.clone())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolves_named_and_hex_colors() {
        let bank = BackgroundBank::new();
        assert_eq!(
            bank.resolve("white").unwrap().solid_color(),
            Some(Rgb([255, 255, 255]))
        );
        assert_eq!(
            bank.resolve("solid/12ab34").unwrap().solid_color(),
            Some(Rgb([0x12, 0xab, 0x34]))
        );
        assert!(matches!(
            bank.resolve("image/missing"),
            Err(VariationError::UnknownBackground(_))
        ));
        assert!(bank.resolve("solid/zzzzzz").is_err());
    }

    #[test]
    fn image_background_covers_canvas() {
        let mut src = RgbaImage::from_pixel(40, 20, Rgba([10, 20, 30, 255]));
        src.put_pixel(0, 0, Rgba([255, 0, 0, 255]));
        let bg = Background::image("image/x", &src);
        let out = bg.render(64, 64);
        assert_eq!(out.dimensions(), (64, 64));
        assert_eq!(*out.get_pixel(32, 32), Rgb([10, 20, 30]));
    }
}
