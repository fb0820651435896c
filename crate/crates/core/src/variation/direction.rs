use super::VariationError;
use crate::model::Direction;

/// Direction obtained by rotating `label`'s pointing vector clockwise by
/// `rotation` degrees. The rotation must be a multiple of 45.
pub fn remap_direction_label(label: Direction, rotation: f64) -> Result<Direction, VariationError> {
    let steps = rotation / 45.0;
    if !steps.is_finite() || (steps - steps.round()).abs() > 1e-9 {
        return Err(VariationError::DirectionRotation(rotation));
    }
    let steps = (steps.round() as i64).rem_euclid(8) as usize;
    Ok(Direction::CLOCKWISE[(label.index() + steps) % 8])
}
