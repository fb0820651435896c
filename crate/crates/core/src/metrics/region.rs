use serde::{Deserialize, Serialize};

use super::MetricError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionBias {
    pub middle: Option<f64>,
    pub surrounding: Option<f64>,
}

/// Whether cell `i` of a `g`-cell axis has its center `(i + 0.5) / g` in
/// the closed central third `[1/3, 2/3]`. Integer arithmetic keeps the
/// boundary exact.
pub fn is_middle_cell(i: usize, g: usize) -> bool {
    let c = 3 * (2 * i + 1);
    c >= 2 * g && c <= 4 * g
}

/// Means over the central-third cells and the rest; `None` cells (anchors
/// without samples) are left out, and a side with no cells is `None`.
pub fn region_bias_partial(map: &[Vec<Option<f64>>]) -> Result<RegionBias, MetricError> {
    let g = map.len();
    if g < 3 || map.iter().any(|row| row.len() != g) {
        return Err(MetricError::RegionGrid {
            rows: g,
            cols: map.first().map_or(0, Vec::len),
        });
    }
    let (mut mid, mut rest) = ((0.0, 0usize), (0.0, 0usize));
    for (y, row) in map.iter().enumerate() {
        for (x, cell) in row.iter().enumerate() {
            let Some(v) = cell else { continue };
            let acc = if is_middle_cell(x, g) && is_middle_cell(y, g) {
                &mut mid
            } else {
                &mut rest
            };
            acc.0 += v;
            acc.1 += 1;
        }
    }
    let mean = |(s, n): (f64, usize)| (n > 0).then(|| s / n as f64);
    Ok(RegionBias {
        middle: mean(mid),
        surrounding: mean(rest),
    })
}

/// [`region_bias_partial`] over a complete map.
pub fn region_bias(map: &[Vec<f64>]) -> Result<RegionBias, MetricError> {
    let full: Vec<Vec<Option<f64>>> = map.iter().map(|r| r.iter().copied().map(Some).collect()).collect();
    region_bias_partial(&full)
}
