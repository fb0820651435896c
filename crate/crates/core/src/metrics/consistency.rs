use serde::{Deserialize, Serialize};

use super::MetricError;
use crate::model::Weights;

/// `1 - population standard deviation` of per-variation metric values in `[0, 1]`.
pub fn consistency(values: &[f64]) -> Result<f64, MetricError> {
    if values.is_empty() {
        return Err(MetricError::Empty("consistency"));
    }
    if let Some((index, &value)) = values
        .iter()
        .enumerate()
        .find(|(_, v)| !(0.0..=1.0).contains(*v))
    {
        return Err(MetricError::OutOfRange { index, value });
    }
    if values.iter().all(|v| *v == values[0]) {
        return Ok(1.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    // unequal inputs stay strictly below 1 even when the deviation rounds away
    Ok((1.0 - var.sqrt()).clamp(0.0, 1.0 - f64::EPSILON / 2.0))
}

/// Robustness components for one (model, task, dimension); absent ones are `None`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StabilityScores {
    pub consistency: Option<f64>,
    pub semantic: Option<f64>,
    pub token: Option<f64>,
    pub judge: Option<f64>,
}

impl StabilityScores {
    /// Output stability: mean of the semantic and token scores present.
    pub fn stability(&self) -> Option<f64> {
        let parts: Vec<f64> = [self.semantic, self.token].into_iter().flatten().collect();
        (!parts.is_empty()).then(|| parts.iter().sum::<f64>() / parts.len() as f64)
    }
}

/// Weighted mean of the present dimensions (consistency, output stability,
/// judge) with the weights renormalized over those present.
pub fn aggregate_robustness(scores: &StabilityScores, weights: &Weights) -> Result<f64, MetricError> {
    let parts = [
        (scores.consistency, weights.consistency),
        (scores.stability(), weights.stability),
        (scores.judge, weights.judge),
    ];
    if parts.iter().any(|(_, w)| !(w.is_finite() && *w >= 0.0)) {
        return Err(MetricError::Weights("weights must be finite and non-negative".into()));
    }
    let present: Vec<(f64, f64)> = parts.into_iter().filter_map(|(v, w)| v.map(|v| (v, w))).collect();
    if present.is_empty() {
        return Err(MetricError::NothingToAggregate);
    }
    let total: f64 = present.iter().map(|(_, w)| w).sum();
    if total <= 0.0 {
        return Err(MetricError::Weights("present components all have zero weight".into()));
    }
    Ok(present.iter().map(|(v, w)| v * w).sum::<f64>() / total)
}
