//! Procedural stand-in assets.
//!
//! The arrow is the direction-task foreground. The object silhouettes are
//! placeholders for the ten default categories so the pipeline runs without
//! an external asset bank; real runs load photographs through
//! [`load_asset_dir`](super::load_asset_dir).

use image::{Rgba, RgbaImage};

use super::asset::Asset;
use crate::model::Direction;

const ARROW_COLOR: Rgba<u8> = Rgba([25, 25, 25, 255]);

fn rasterize(w: u32, h: u32, color: Rgba<u8>, inside: impl Fn(f64, f64) -> bool) -> RgbaImage {
    RgbaImage::from_fn(w, h, |x, y| {
        if inside(x as f64 + 0.5, y as f64 + 0.5) {
            color
        } else {
            Rgba([color.0[0], color.0[1], color.0[2], 0])
        }
    })
}

/// Right-pointing arrow: thin shaft, heavy triangular head.
pub fn arrow_image() -> RgbaImage {
    let (w, h) = (400.0, 240.0);
    rasterize(w as u32, h as u32, ARROW_COLOR, |x, y| {
        let shaft = x < 240.0 && (y - h / 2.0).abs() <= 30.0;
        let head = x >= 240.0 && (y - h / 2.0).abs() <= (w - x) * (h / 2.0) / 160.0;
        shaft || head
    })
}

/// The arrow labelled `right`; rotations produce the other seven labels.
pub fn arrow_asset() -> Asset {
    Asset::new(Direction::Right.as_str(), "arrow", arrow_image()).expect("arrow has pixels")
}

fn polygon_contains(poly: &[(f64, f64)], x: f64, y: f64) -> bool {
    let mut inside = false;
    let mut j = poly.len() - 1;
    for i in 0..poly.len() {
        let (xi, yi) = poly[i];
        let (xj, yj) = poly[j];
        if (yi > y) != (yj > y) && x < (xj - xi) * (y - yi) / (yj - yi) + xi {
            inside = !inside;
        }
        j = i;
    }
    inside
}

fn regular_polygon(n: usize, r: f64, c: f64, phase: f64) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let a = phase + i as f64 * std::f64::consts::TAU / n as f64;
            (c + r * a.cos(), c + r * a.sin())
        })
        .collect()
}

/// One silhouette per default category, 256 px, distinct colors.
pub fn object_assets() -> Vec<Asset> {
    let s = 256u32;
    let c = s as f64 / 2.0;
    let star: Vec<(f64, f64)> = (0..10)
        .map(|i| {
            let r = if i % 2 == 0 { 128.0 } else { 52.0 };
            let a = -std::f64::consts::FRAC_PI_2 + i as f64 * std::f64::consts::PI / 5.0;
            (c + r * a.cos(), c + r * a.sin())
        })
        .collect();
    let hexagon = regular_polygon(6, 128.0, c, 0.0);
    let triangle = vec![(c, 0.0), (256.0, 256.0), (0.0, 256.0)];
    let diamond = vec![(c, 0.0), (256.0, c), (c, 256.0), (0.0, c)];

    let shapes: Vec<(&str, [u8; 3], Box<dyn Fn(f64, f64) -> bool>)> = vec![
        ("shiba dog", [205, 133, 63], Box::new(move |x, y| (x - c).hypot(y - c) <= 128.0)),
        ("cat", [112, 112, 112], Box::new(move |x, y| polygon_contains(&triangle, x, y))),
        ("bear", [101, 67, 33], Box::new(|_, _| true)),
        ("eagle", [139, 90, 43], Box::new(move |x, y| polygon_contains(&diamond, x, y))),
        ("snake", [34, 139, 34], Box::new(move |x, y| {
            let d = (x - c).hypot(y - c);
            (80.0..=128.0).contains(&d)
        })),
        ("panda", [20, 20, 20], Box::new(move |x, y| (x - c).abs() <= 40.0 || (y - c).abs() <= 40.0)),
        ("turtle", [46, 139, 87], Box::new(move |x, y| polygon_contains(&hexagon, x, y))),
        ("fish", [30, 144, 255], Box::new(move |x, y| {
            ((x - c) / 128.0).powi(2) + ((y - c) / 64.0).powi(2) <= 1.0
        })),
        ("car", [200, 30, 30], Box::new(move |_, y| (y - c).abs() <= 64.0)),
        ("plane", [160, 160, 190], Box::new(move |x, y| polygon_contains(&star, x, y))),
    ];
    shapes
        .into_iter()
        .map(|(label, rgb, inside)| {
            let img = rasterize(s, s, Rgba([rgb[0], rgb[1], rgb[2], 255]), inside);
            let key = super::asset::sanitize_key(label);
            Asset::new(label, key, img).expect("placeholder has pixels")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DEFAULT_CLASSES;

    #[test]
    fn one_placeholder_per_default_class() {
        let labels: Vec<String> = object_assets().iter().map(|a| a.label().to_string()).collect();
        assert_eq!(labels, DEFAULT_CLASSES.map(String::from).to_vec());
    }

    #[test]
    fn arrow_head_is_heavier_than_shaft() {
        let a = arrow_asset();
        let (mut sum, mut n) = (0.0, 0.0);
        for (x, _, p) in a.pixels().enumerate_pixels() {
            if p.0[3] > 0 {
                sum += x as f64 + 0.5;
                n += 1.0;
            }
        }
        assert!(sum / n > a.pixels().width() as f64 / 2.0 + 10.0);
    }
}
