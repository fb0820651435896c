use image::RgbImage;
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::raster::{draw_text, glyph, GLYPH};
use super::{image_rel_path, style, SynthError};
use crate::model::{BlurLevel, GroundTruth, Replacement, SampleRecord, Task, TaskParams};

/// Fluent source sentences bundled for the corrupted-text task.
pub fn bundled_texts() -> Vec<String> {
    include_str!("../../data/ocr_texts.txt")
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OcrTaskSpec {
    pub text: String,
    pub replacements: Vec<Replacement>,
    pub blur: BlurLevel,
}

impl OcrTaskSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let chars: Vec<char> = self.text.chars().collect();
        let mut seen = std::collections::HashSet::new();
        for r in &self.replacements {
            if !seen.insert(r.index) {
                return Err(SynthError::InvalidSpec(format!("duplicate replacement index {}", r.index)));
            }
            match chars.get(r.index) {
                None => {
                    return Err(SynthError::InvalidSpec(format!(
                        "replacement index {} beyond text length {}",
                        r.index,
                        chars.len()
                    )))
                }
                Some(c) if *c != r.original => {
                    return Err(SynthError::InvalidSpec(format!(
                        "text[{}] is `{c}`, not `{}`",
                        r.index, r.original
                    )))
                }
                _ => {}
            }
            if r.replacement == r.original {
                return Err(SynthError::InvalidSpec(format!(
                    "replacement at {} leaves `{}` unchanged",
                    r.index, r.original
                )));
            }
        }
        Ok(())
    }

    /// Text as rendered, with every replacement applied.
    pub fn corrupted(&self) -> String {
        crate::model::apply_replacements(&self.text, &self.replacements)
    }

    /// `count` distinct letters swapped for a different letter of the same case.
    pub fn sample<R: Rng>(text: &str, count: usize, blur: BlurLevel, rng: &mut R) -> Result<Self, SynthError> {
        let letters: Vec<(usize, char)> = text
            .chars()
            .enumerate()
            .filter(|(_, c)| c.is_ascii_alphabetic())
            .collect();
        if letters.len() < count {
            return Err(SynthError::InvalidSpec(format!(
                "text has {} letters, {count} replacements requested",
                letters.len()
            )));
        }
        let mut picks: Vec<usize> = sample(rng, letters.len(), count).into_vec();
        picks.sort_unstable();
        let replacements = picks
            .into_iter()
            .map(|k| {
                let (index, original) = letters[k];
                let base = if original.is_ascii_uppercase() { b'A' } else { b'a' };
                let offset = (original as u8 - base + rng.gen_range(1..26)) % 26;
                Replacement {
                    index,
                    original,
                    replacement: (base + offset) as char,
                }
            })
            .collect();
        Ok(OcrTaskSpec {
            text: text.to_string(),
            replacements,
            blur,
        })
    }
}

/// Greedy word wrap to at most `width` characters per line.
fn wrap(text: &str, width: usize) -> Vec<String> {
    let mut lines = Vec::new();
    let mut current = String::new();
    for word in text.split_whitespace() {
        let needed = if current.is_empty() { 0 } else { 1 } + word.chars().count();
        if !current.is_empty() && current.chars().count() + needed > width {
            lines.push(std::mem::take(&mut current));
        }
        if !current.is_empty() {
            current.push(' ');
        }
        current.push_str(word);
    }
    if !current.is_empty() {
        lines.push(current);
    }
    lines
}

pub fn render_ocr(spec: &OcrTaskSpec) -> Result<RgbImage, SynthError> {
    spec.validate()?;
    let text = spec.corrupted();
    if let Some(c) = text.chars().find(|c| !c.is_whitespace() && glyph(*c).is_none()) {
        return Err(SynthError::InvalidSpec(format!("no glyph for `{c}`")));
    }
    let (w, h) = style::OCR_CANVAS;
    let glyph_px = GLYPH * style::OCR_SCALE;
    let per_line = ((w - 2 * style::OCR_MARGIN) / glyph_px) as usize;
    let max_lines = ((h - 2 * style::OCR_MARGIN + style::OCR_LINE_GAP) / (glyph_px + style::OCR_LINE_GAP)) as usize;
    let lines = wrap(&text, per_line);
    if lines.len() > max_lines || lines.iter().any(|l| l.chars().count() > per_line) {
        return Err(SynthError::TooLong {
            chars: text.chars().count(),
            max_lines,
            per_line,
        });
    }
    let mut img = RgbImage::from_pixel(w, h, style::BACKGROUND);
    for (i, line) in lines.iter().enumerate() {
        let y = style::OCR_MARGIN + i as u32 * (glyph_px + style::OCR_LINE_GAP);
        draw_text(&mut img, style::OCR_MARGIN as i64, y as i64, line, style::OCR_SCALE, style::OCR_INK);
    }
    let sigma = spec.blur.sigma();
    if sigma > 0.0 {
        img = image::imageops::blur(&img, sigma);
    }
    Ok(img)
}

/// Renders the corrupted text; the ground truth is the replacement list.
pub fn gen_ocr_sample(spec: &OcrTaskSpec, seed: u64, id: &str) -> Result<(RgbImage, SampleRecord), SynthError> {
    let img = render_ocr(spec)?;
    let record = SampleRecord {
        id: id.to_string(),
        task: Task::Ocr,
        image_path: Some(image_rel_path(Task::Ocr, id)),
        variation: None,
        ground_truth: GroundTruth::Ocr {
            source_text: spec.text.clone(),
            replacements: spec.replacements.clone(),
        },
        prompt_id: Task::Ocr.to_string(),
        seed,
        source: Some(id.to_string()),
        params: Some(TaskParams::Ocr { blur: spec.blur }),
    };
    Ok((img, record))
}
