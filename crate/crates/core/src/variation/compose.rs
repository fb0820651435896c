use image::{Rgb, RgbImage, RgbaImage};

use super::asset::{Asset, PixelBox};
use super::background::Background;
use super::direction::remap_direction_label;
use super::VariationError;
use crate::model::{Direction, GroundTruth, Task, Variation};

/// Premultiplied RGBA buffer in `[0, 1]`.
#[derive(Debug, Clone)]
pub(crate) struct PremulBuf {
    pub width: usize,
    pub height: usize,
    pub data: Vec<[f32; 4]>,
}

impl PremulBuf {
    fn from_rgba(img: &RgbaImage) -> Self {
        let data = img
            .pixels()
            .map(|p| {
                let a = p.0[3] as f32 / 255.0;
                [
                    p.0[0] as f32 / 255.0 * a,
                    p.0[1] as f32 / 255.0 * a,
                    p.0[2] as f32 / 255.0 * a,
                    a,
                ]
            })
            .collect();
        PremulBuf {
            width: img.width() as usize,
            height: img.height() as usize,
            data,
        }
    }

    fn at(&self, x: usize, y: usize) -> [f32; 4] {
        self.data[y * self.width + x]
    }
}

/// Coverage weights of source cells `[i, i+1)` over `[lo, hi)`.
fn box_weights(lo: f64, hi: f64, n: usize) -> Vec<(usize, f32)> {
    let first = lo.floor().max(0.0) as usize;
    let last = (hi.ceil() as usize).min(n);
    let span = hi - lo;
    (first..last)
        .filter_map(|i| {
            let overlap = (hi.min(i as f64 + 1.0) - lo.max(i as f64)).max(0.0);
            (overlap > 0.0).then_some((i, (overlap / span) as f32))
        })
        .collect()
}

/// Area-average resampling to exactly `dw × dh`.
fn resample_area(src: &PremulBuf, dw: usize, dh: usize) -> PremulBuf {
    let sx = src.width as f64 / dw as f64;
    let sy = src.height as f64 / dh as f64;

    let mut horiz = vec![[0f32; 4]; dw * src.height];
    for x in 0..dw {
        let weights = box_weights(x as f64 * sx, (x + 1) as f64 * sx, src.width);
        for y in 0..src.height {
            let mut acc = [0f32; 4];
            for &(i, w) in &weights {
                let p = src.at(i, y);
                for c in 0..4 {
                    acc[c] += p[c] * w;
                }
            }
            horiz[y * dw + x] = acc;
        }
    }

    let mut out = vec![[0f32; 4]; dw * dh];
    for y in 0..dh {
        let weights = box_weights(y as f64 * sy, (y + 1) as f64 * sy, src.height);
        for x in 0..dw {
            let mut acc = [0f32; 4];
            for &(j, w) in &weights {
                let p = horiz[j * dw + x];
                for c in 0..4 {
                    acc[c] += p[c] * w;
                }
            }
            out[y * dw + x] = acc;
        }
    }
    PremulBuf {
        width: dw,
        height: dh,
        data: out,
    }
}

/// Bilinear sample at continuous texel coordinates, clamped to the buffer.
fn sample_bilinear(buf: &PremulBuf, u: f64, v: f64) -> [f32; 4] {
    let u = u.clamp(0.0, (buf.width - 1) as f64);
    let v = v.clamp(0.0, (buf.height - 1) as f64);
    let (x0, y0) = (u.floor() as usize, v.floor() as usize);
    let (x1, y1) = ((x0 + 1).min(buf.width - 1), (y0 + 1).min(buf.height - 1));
    let (fx, fy) = ((u - x0 as f64) as f32, (v - y0 as f64) as f32);
    let (a, b, c, d) = (buf.at(x0, y0), buf.at(x1, y0), buf.at(x0, y1), buf.at(x1, y1));
    let mut out = [0f32; 4];
    for k in 0..4 {
        let top = a[k] + (b[k] - a[k]) * fx;
        let bottom = c[k] + (d[k] - c[k]) * fx;
        out[k] = top + (bottom - top) * fy;
    }
    out
}

/// Exact sine/cosine for multiples of 90 degrees.
fn sin_cos_degrees(deg: f64) -> (f64, f64) {
    let d = deg.rem_euclid(360.0);
    for (q, sc) in [(0.0, (0.0, 1.0)), (90.0, (1.0, 0.0)), (180.0, (0.0, -1.0)), (270.0, (-1.0, 0.0))] {
        if (d - q).abs() < 1e-12 {
            return sc;
        }
    }
    d.to_radians().sin_cos()
}

/// Where and how large the object ended up on the canvas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    /// Rotation center on the canvas.
    pub center: (f64, f64),
    /// Scaled (pre-rotation) object size; the longer side is `round(s·min(W, H))`.
    pub scaled_size: (u32, u32),
    /// Axis-aligned extent of the rotated object.
    pub extent: (f64, f64),
}

/// Scaled object size: longer tight-box side equals `round(scale · min(W, H))`.
pub fn scaled_size(asset_size: (u32, u32), scale: f64, canvas: (u32, u32)) -> (u32, u32) {
    let target = (scale * canvas.0.min(canvas.1) as f64).round().max(1.0);
    let (w, h) = (asset_size.0 as f64, asset_size.1 as f64);
    let f = target / w.max(h);
    if w >= h {
        (target as u32, (h * f).round().max(1.0) as u32)
    } else {
        ((w * f).round().max(1.0) as u32, target as u32)
    }
}

/// Computes the placement of `asset` under `v`, failing if it leaves the canvas.
pub fn plan_placement(
    asset: &Asset,
    v: &Variation,
    canvas: (u32, u32),
) -> Result<Placement, VariationError> {
    v.check_in_canvas(canvas.0, canvas.1)
        .map_err(VariationError::InvalidVariation)?;
    let (sw, sh) = scaled_size(asset.pixels().dimensions(), v.scale, canvas);
    let (sin, cos) = sin_cos_degrees(v.rotation);
    let ew = sw as f64 * cos.abs() + sh as f64 * sin.abs();
    let eh = sw as f64 * sin.abs() + sh as f64 * cos.abs();
    let (ax, ay) = (v.position.x, v.position.y);
    let eps = 1e-9;
    if ax - ew / 2.0 < -eps
        || ay - eh / 2.0 < -eps
        || ax + ew / 2.0 > canvas.0 as f64 + eps
        || ay + eh / 2.0 > canvas.1 as f64 + eps
    {
        return Err(VariationError::OutOfBounds {
            anchor: (ax, ay),
            extent: (ew, eh),
            canvas,
        });
    }
    // Snap the top-left of the unrotated object to the pixel grid so an
    // unrotated placement samples texel centers exactly.
    let cx = (ax - sw as f64 / 2.0).round() + sw as f64 / 2.0;
    let cy = (ay - sh as f64 / 2.0).round() + sh as f64 / 2.0;
    Ok(Placement {
        center: (cx, cy),
        scaled_size: (sw, sh),
        extent: (ew, eh),
    })
}

/// Ground truth of `asset` under `rotation` for `task`.
pub fn variant_ground_truth(
    task: Task,
    asset: &Asset,
    rotation: f64,
) -> Result<GroundTruth, VariationError> {
    match task {
        Task::Object => Ok(GroundTruth::Category(asset.label().to_string())),
        Task::Direction => {
            let label: Direction = asset
                .label()
                .parse()
                .map_err(|_| VariationError::UnknownDirection(asset.label().to_string()))?;
            Ok(GroundTruth::Direction(remap_direction_label(label, rotation)?))
        }
        Task::ExtendedBenchmark => Ok(GroundTruth::Text(asset.label().to_string())),
        other => Err(VariationError::UnsupportedTask(other)),
    }
}

/// Renders `asset` over `background` under variation `v`.
///
/// The asset is area-resampled so its longer tight-box side is
/// `round(s · min(W, H))`, then rotated clockwise about its center with
/// bilinear sampling and transparent fill, and alpha-composited with its
/// center at the anchor.
pub fn apply_variation(
    asset: &Asset,
    background: &Background,
    v: &Variation,
    canvas: (u32, u32),
    task: Task,
) -> Result<(RgbImage, GroundTruth), VariationError> {
    let truth = variant_ground_truth(task, asset, v.rotation)?;
    if background.id != v.context {
        return Err(VariationError::UnknownBackground(v.context.clone()));
    }
    let bg = background.render(canvas.0, canvas.1);
    let (img, _) = composite(asset, bg, v, canvas)?;
    Ok((img, truth))
}

/// Composites onto an already rendered background.
pub(crate) fn composite(
    asset: &Asset,
    mut canvas_img: RgbImage,
    v: &Variation,
    canvas: (u32, u32),
) -> Result<(RgbImage, Placement), VariationError> {
    let placement = plan_placement(asset, v, canvas)?;
    let (sw, sh) = placement.scaled_size;
    let scaled = resample_area(
        &PremulBuf::from_rgba(asset.pixels()),
        sw as usize,
        sh as usize,
    );
    let (sin, cos) = sin_cos_degrees(v.rotation);
    let (cx, cy) = placement.center;
    let (ew, eh) = placement.extent;
    let (hw, hh) = (sw as f64 / 2.0, sh as f64 / 2.0);

    let x_lo = (cx - ew / 2.0 - 1.0).floor().max(0.0) as u32;
    let y_lo = (cy - eh / 2.0 - 1.0).floor().max(0.0) as u32;
    let x_hi = ((cx + ew / 2.0 + 1.0).ceil() as u32).min(canvas.0);
    let y_hi = ((cy + eh / 2.0 + 1.0).ceil() as u32).min(canvas.1);

    for y in y_lo..y_hi {
        for x in x_lo..x_hi {
            let dx = x as f64 + 0.5 - cx;
            let dy = y as f64 + 0.5 - cy;
            let u = cos * dx + sin * dy + hw;
            let w = -sin * dx + cos * dy + hh;
            if u < 0.0 || w < 0.0 || u > sw as f64 || w > sh as f64 {
                continue;
            }
            let src = sample_bilinear(&scaled, u - 0.5, w - 0.5);
            let alpha = src[3];
            if alpha <= 0.0 {
                continue;
            }
            let px = canvas_img.get_pixel_mut(x, y);
            let mut out = [0u8; 3];
            for c in 0..3 {
                let bgc = px.0[c] as f32 / 255.0;
                let value = src[c] + bgc * (1.0 - alpha);
                out[c] = (value * 255.0).round().clamp(0.0, 255.0) as u8;
            }
            *px = Rgb(out);
        }
    }
    Ok((canvas_img, placement))
}

/// Tight box of pixels that differ from a solid background color.
pub fn object_box(img: &RgbImage, background: Rgb<u8>) -> Option<PixelBox> {
    super::asset::tight_box(img, |p| *p != background)
}
