use image::RgbImage;

use super::raster::{draw_text, line, text_width, GLYPH};
use super::style;
use crate::model::PlotRange;

/// Affine map between data coordinates and pixels for one plot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotFrame {
    pub dims: u8,
    pub range: PlotRange,
    pub width: u32,
    pub height: u32,
    left: f64,
    right: f64,
    top: f64,
    bottom: f64,
}

impl PlotFrame {
    pub fn new(dims: u8, range: PlotRange) -> Self {
        let (width, height) = if dims == 1 {
            style::CANVAS_1D
        } else {
            style::CANVAS_2D
        };
        let m = style::PLOT_MARGIN;
        PlotFrame {
            dims,
            range,
            width,
            height,
            left: m,
            right: width as f64 - m,
            top: m,
            bottom: height as f64 - m,
        }
    }

    fn span(&self) -> f64 {
        self.range.span() as f64
    }

    pub fn x_to_px(&self, x: f64) -> f64 {
        self.left + (x - self.range.lo as f64) / self.span() * (self.right - self.left)
    }

    pub fn y_to_px(&self, y: f64) -> f64 {
        if self.dims == 1 {
            return self.height as f64 / 2.0;
        }
        self.bottom - (y - self.range.lo as f64) / self.span() * (self.bottom - self.top)
    }

    /// Pixel position of a data point (one or two components).
    pub fn to_pixel(&self, p: &[f64]) -> (f64, f64) {
        let y = p.get(1).copied().unwrap_or(0.0);
        (self.x_to_px(p[0]), self.y_to_px(y))
    }

    /// Inverse of [`to_pixel`](Self::to_pixel); returns `dims` components.
    pub fn to_data(&self, px: (f64, f64)) -> Vec<f64> {
        let x = self.range.lo as f64 + (px.0 - self.left) / (self.right - self.left) * self.span();
        if self.dims == 1 {
            return vec![x];
        }
        let y = self.range.lo as f64 + (self.bottom - px.1) / (self.bottom - self.top) * self.span();
        vec![x, y]
    }

    /// Pixels per data unit along x.
    pub fn unit_px(&self) -> f64 {
        (self.right - self.left) / self.span()
    }

    fn origin(&self) -> (f64, f64) {
        let pick = |v: f64| if self.range.contains(0) { 0.0 } else { v };
        let lo = self.range.lo as f64;
        (pick(lo), pick(lo))
    }

    fn label_step(&self) -> i64 {
        if self.range.span() <= 10 {
            1
        } else {
            2
        }
    }

    pub fn blank(&self) -> RgbImage {
        RgbImage::from_pixel(self.width, self.height, style::BACKGROUND)
    }

    /// Grid lines at every integer across the plot area.
    pub fn draw_grid(&self, img: &mut RgbImage) {
        for v in self.range.lo..=self.range.hi {
            let x = self.x_to_px(v as f64) as f32;
            let (y0, y1) = if self.dims == 1 {
                (self.height as f32 / 2.0 - 40.0, self.height as f32 / 2.0 + 40.0)
            } else {
                (self.top as f32, self.bottom as f32)
            };
            line(img, (x, y0), (x, y1), style::GRID);
            if self.dims == 2 {
                let y = self.y_to_px(v as f64) as f32;
                line(img, (self.left as f32, y), (self.right as f32, y), style::GRID);
            }
        }
    }

    /// Axes, ticks and integer labels.
    pub fn draw_axes(&self, img: &mut RgbImage) {
        let (ox, oy) = self.origin();
        let axis_y = self.y_to_px(oy) as f32;
        line(img, (self.left as f32, axis_y), (self.right as f32, axis_y), style::AXIS);
        let axis_x = self.x_to_px(ox) as f32;
        if self.dims == 2 {
            line(img, (axis_x, self.top as f32), (axis_x, self.bottom as f32), style::AXIS);
        }
        let scale = style::LABEL_SCALE;
        let glyph_h = (GLYPH * scale) as i64;
        for v in self.range.lo..=self.range.hi {
            let x = self.x_to_px(v as f64) as f32;
            line(img, (x, axis_y - style::TICK_LEN), (x, axis_y + style::TICK_LEN), style::AXIS);
            if self.dims == 2 {
                let y = self.y_to_px(v as f64) as f32;
                line(img, (axis_x - style::TICK_LEN, y), (axis_x + style::TICK_LEN, y), style::AXIS);
            }
            if v % self.label_step() != 0 {
                continue;
            }
            let text = v.to_string();
            let tw = text_width(&text, scale) as i64;
            draw_text(
                img,
                x as i64 - tw / 2,
                axis_y as i64 + style::TICK_LEN as i64 + 4,
                &text,
                scale,
                style::LABEL,
            );
            if self.dims == 2 && v as f64 != oy {
                let y = self.y_to_px(v as f64) as i64;
                draw_text(
                    img,
                    axis_x as i64 - style::TICK_LEN as i64 - 4 - tw,
                    y - glyph_h / 2,
                    &text,
                    scale,
                    style::LABEL,
                );
            }
        }
    }

    /// Projection lines from `p` to the axes.
    pub fn draw_reference_lines(&self, img: &mut RgbImage, p: &[f64]) {
        let (px, py) = self.to_pixel(p);
        let (ox, oy) = self.origin();
        let axis_y = self.y_to_px(oy) as f32;
        if self.dims == 1 {
            let (px, mid) = (px as f32, axis_y);
            super::raster::dashed_line(img, (px, mid - 60.0), (px, mid + 60.0), style::DASH, style::REFERENCE);
            return;
        }
        let axis_x = self.x_to_px(ox) as f32;
        let (px, py) = (px as f32, py as f32);
        super::raster::dashed_line(img, (px, py), (px, axis_y), style::DASH, style::REFERENCE);
        super::raster::dashed_line(img, (px, py), (axis_x, py), style::DASH, style::REFERENCE);
    }
}
