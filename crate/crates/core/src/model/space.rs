use serde::{Deserialize, Serialize};

use super::config::RunConfig;

/// Object-center position in pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub x: f64,
    pub y: f64,
}

/// One point of the position × scale × rotation × context space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variation {
    pub position: Anchor,
    /// Longer side of the object as a fraction of `min(W, H)`.
    pub scale: f64,
    /// Clockwise degrees.
    pub rotation: f64,
    pub context: String,
}

impl Variation {
    /// Checks the invariants that do not depend on a canvas or background bank.
    pub fn check_intrinsic(&self) -> Result<(), String> {
        if !(self.scale > 0.0 && self.scale <= 1.0) {
            return Err(format!("scale {} outside (0, 1]", self.scale));
        }
        if !(0.0..360.0).contains(&self.rotation) {
            return Err(format!("rotation {} outside [0, 360)", self.rotation));
        }
        if self.context.is_empty() {
            return Err("empty context id".into());
        }
        Ok(())
    }

    pub fn check_in_canvas(&self, width: u32, height: u32) -> Result<(), String> {
        self.check_intrinsic()?;
        let Anchor { x, y } = self.position;
        if !(0.0..=width as f64).contains(&x) || !(0.0..=height as f64).contains(&y) {
            return Err(format!("anchor ({x}, {y}) outside {width}x{height} canvas"));
        }
        Ok(())
    }
}

/// Indices of a variant inside its space, in enumeration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VariantIndex {
    pub position: usize,
    pub scale: usize,
    pub rotation: usize,
    pub context: usize,
}

/// The full product grid of variations for one canvas.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationSpace {
    pub width: u32,
    pub height: u32,
    /// Side of the anchor grid; `positions.len() == grid * grid`.
    pub grid: usize,
    pub positions: Vec<Anchor>,
    pub scales: Vec<f64>,
    pub rotations: Vec<f64>,
    pub contexts: Vec<String>,
}

impl VariationSpace {
    /// `|P|·|S|·|R|·|C|`.
    pub fn len(&self) -> usize {
        self.positions.len() * self.scales.len() * self.rotations.len() * self.contexts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Enumerates the product with positions outermost and contexts innermost.
    pub fn iter(&self) -> impl Iterator<Item = (VariantIndex, Variation)> + '_ {
        let (ns, nr, nc) = (self.scales.len(), self.rotations.len(), self.contexts.len());
        (0..self.len()).map(move |flat| {
            let c = flat % nc;
            let r = (flat / nc) % nr;
            let s = (flat / (nc * nr)) % ns;
            let p = flat / (nc * nr * ns);
            let idx = VariantIndex {
                position: p,
                scale: s,
                rotation: r,
                context: c,
            };
            let v = Variation {
                position: self.positions[p],
                scale: self.scales[s],
                rotation: self.rotations[r],
                context: self.contexts[c].clone(),
            };
            (idx, v)
        })
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SpaceError {
    #[error("grid resolution must be at least 1 and at most min(W, H), got {0}")]
    Grid(usize),
    #[error("canvas {0}x{1} is smaller than the 32x32 minimum")]
    Canvas(u32, u32),
    #[error("`{0}` list is empty")]
    Empty(&'static str),
    #[error("`{0}` list contains duplicate {1}")]
    Duplicate(&'static str, String),
    #[error("scale {0} outside (0, 1]")]
    Scale(f64),
    #[error("rotation {0} outside [0, 360)")]
    Rotation(f64),
    #[error(
        "object side {side:.1}px at scale {scale} does not fit any anchor of a {grid}x{grid} grid on {width}x{height}"
    )]
    Sizing {
        side: f64,
        scale: f64,
        grid: usize,
        width: u32,
        height: u32,
    },
}

fn check_unique<T: PartialEq + std::fmt::Debug>(
    name: &'static str,
    items: &[T],
) -> Result<(), SpaceError> {
    if items.is_empty() {
        return Err(SpaceError::Empty(name));
    }
    for (i, a) in items.iter().enumerate() {
        if items[..i].contains(a) {
            return Err(SpaceError::Duplicate(name, format!("{a:?}")));
        }
    }
    Ok(())
}

/// Grid cell centers along one axis.
fn cell_centers(extent: u32, grid: usize) -> Vec<f64> {
    let cell = extent as f64 / grid as f64;
    (0..grid).map(|i| (i as f64 + 0.5) * cell).collect()
}

/// Builds the anchor grid and copies the other dimensions from `config`.
pub fn build_variation_space(
    config: &RunConfig,
    (width, height): (u32, u32),
) -> Result<VariationSpace, SpaceError> {
    if width < 32 || height < 32 {
        return Err(SpaceError::Canvas(width, height));
    }
    let grid = config.grid;
    if grid == 0 || grid > width.min(height) as usize {
        return Err(SpaceError::Grid(grid));
    }
    check_unique("scales", &config.scales)?;
    check_unique("rotations", &config.rotations)?;
    check_unique("contexts", &config.contexts)?;
    if let Some(s) = config.scales.iter().find(|s| !(**s > 0.0 && **s <= 1.0)) {
        return Err(SpaceError::Scale(*s));
    }
    if let Some(r) = config.rotations.iter().find(|r| !(0.0..360.0).contains(*r)) {
        return Err(SpaceError::Rotation(*r));
    }

    let xs = cell_centers(width, grid);
    let ys = cell_centers(height, grid);

    let max_scale = config.scales.iter().cloned().fold(f64::MIN, f64::max);
    let side = max_scale * width.min(height) as f64;
    let fits = |centers: &[f64], extent: u32| {
        centers
            .iter()
            .any(|c| c - side / 2.0 >= -1e-9 && c + side / 2.0 <= extent as f64 + 1e-9)
    };
    if !fits(&xs, width) || !fits(&ys, height) {
        return Err(SpaceError::Sizing {
            side,
            scale: max_scale,
            grid,
            width,
            height,
        });
    }

    let positions = ys
        .iter()
        .flat_map(|&y| xs.iter().map(move |&x| Anchor { x, y }))
        .collect();

    Ok(VariationSpace {
        width,
        height,
        grid,
        positions,
        scales: config.scales.clone(),
        rotations: config.rotations.clone(),
        contexts: config.contexts.clone(),
    })
}
