//! Fixed plot and text styling for every synthetic renderer.

use image::Rgb;

pub const CANVAS_2D: (u32, u32) = (672, 672);
pub const CANVAS_1D: (u32, u32) = (672, 240);
pub const PLOT_MARGIN: f64 = 72.0;

pub const BACKGROUND: Rgb<u8> = Rgb([255, 255, 255]);
pub const AXIS: Rgb<u8> = Rgb([0, 0, 0]);
pub const GRID: Rgb<u8> = Rgb([215, 215, 215]);
pub const REFERENCE: Rgb<u8> = Rgb([140, 140, 140]);
pub const LABEL: Rgb<u8> = Rgb([0, 0, 0]);
pub const TICK_LEN: f32 = 6.0;
pub const LABEL_SCALE: u32 = 2;
pub const DASH: (f32, f32) = (8.0, 6.0);

/// Coordinate-task marker.
pub const POINT: Rgb<u8> = Rgb([220, 20, 60]);
pub const POINT_RADIUS: i32 = 7;

pub const PATH_LINE: Rgb<u8> = Rgb([90, 90, 90]);
pub const PATH_LINE_HALF_WIDTH: f32 = 1.5;
pub const VERTEX: Rgb<u8> = Rgb([30, 90, 220]);
pub const VERTEX_RADIUS: i32 = 6;
/// Start-of-path marker, drawn last so it stays visible.
pub const START: Rgb<u8> = Rgb([20, 160, 60]);
pub const START_RADIUS: i32 = 8;

pub const OCR_CANVAS: (u32, u32) = (1024, 384);
pub const OCR_MARGIN: u32 = 32;
pub const OCR_SCALE: u32 = 3;
pub const OCR_LINE_GAP: u32 = 8;
pub const OCR_INK: Rgb<u8> = Rgb([0, 0, 0]);
