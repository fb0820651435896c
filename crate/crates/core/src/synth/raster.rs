//! Small raster helpers over `imageproc` plus bitmap text from `font8x8`.

use font8x8::UnicodeFonts;
use image::{Rgb, RgbImage};
use imageproc::drawing::{draw_filled_circle_mut, draw_line_segment_mut, draw_polygon_mut};
use imageproc::point::Point;

pub(crate) const GLYPH: u32 = 8;

pub(crate) fn glyph(c: char) -> Option<[u8; 8]> {
    font8x8::BASIC_FONTS
        .get(c)
        .or_else(|| font8x8::LATIN_FONTS.get(c))
        .or_else(|| font8x8::GREEK_FONTS.get(c))
}

/// Draws `text` with its top-left corner at `(x, y)`; unsupported glyphs render blank.
pub(crate) fn draw_text(img: &mut RgbImage, x: i64, y: i64, text: &str, scale: u32, color: Rgb<u8>) {
    let (w, h) = (img.width() as i64, img.height() as i64);
    for (i, c) in text.chars().enumerate() {
        let Some(rows) = glyph(c) else { continue };
        let ox = x + (i as u32 * GLYPH * scale) as i64;
        for (gy, row) in rows.iter().enumerate() {
            for gx in 0..8 {
                if row & (1 << gx) == 0 {
                    continue;
                }
                for sy in 0..scale as i64 {
                    for sx in 0..scale as i64 {
                        let px = ox + gx as i64 * scale as i64 + sx;
                        let py = y + gy as i64 * scale as i64 + sy;
                        if (0..w).contains(&px) && (0..h).contains(&py) {
                            img.put_pixel(px as u32, py as u32, color);
                        }
                    }
                }
            }
        }
    }
}

pub(crate) fn text_width(text: &str, scale: u32) -> u32 {
    text.chars().count() as u32 * GLYPH * scale
}

pub(crate) fn line(img: &mut RgbImage, a: (f32, f32), b: (f32, f32), color: Rgb<u8>) {
    draw_line_segment_mut(img, a, b, color);
}

/// Dashed segment with `(on, off)` lengths in pixels.
pub(crate) fn dashed_line(img: &mut RgbImage, a: (f32, f32), b: (f32, f32), dash: (f32, f32), color: Rgb<u8>) {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len = dx.hypot(dy);
    if len == 0.0 {
        return;
    }
    let (ux, uy) = (dx / len, dy / len);
    let mut t = 0.0;
    while t < len {
        let end = (t + dash.0).min(len);
        line(img, (a.0 + ux * t, a.1 + uy * t), (a.0 + ux * end, a.1 + uy * end), color);
        t += dash.0 + dash.1;
    }
}

/// Segment of width `2 * half_width` drawn as a filled quadrilateral.
pub(crate) fn thick_line(img: &mut RgbImage, a: (f32, f32), b: (f32, f32), half_width: f32, color: Rgb<u8>) {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len = dx.hypot(dy);
    if len < 1e-3 {
        return;
    }
    let (nx, ny) = (-dy / len * half_width, dx / len * half_width);
    let poly = [
        Point::new((a.0 + nx).round() as i32, (a.1 + ny).round() as i32),
        Point::new((b.0 + nx).round() as i32, (b.1 + ny).round() as i32),
        Point::new((b.0 - nx).round() as i32, (b.1 - ny).round() as i32),
        Point::new((a.0 - nx).round() as i32, (a.1 - ny).round() as i32),
    ];
    if poly[0] == poly[3] || poly[0] == poly[1] {
        line(img, a, b, color);
    } else {
        draw_polygon_mut(img, &poly, color);
    }
}

/// Filled disc whose pixel-center centroid lies within half a pixel of `center`.
pub(crate) fn marker(img: &mut RgbImage, center: (f64, f64), radius: i32, color: Rgb<u8>) {
    let c = (center.0.floor() as i32, center.1.floor() as i32);
    draw_filled_circle_mut(img, c, radius, color);
}
