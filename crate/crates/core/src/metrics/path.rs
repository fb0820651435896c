use serde::{Deserialize, Serialize};

use super::MetricError;

/// Exact-match and partial-match scores for one predicted path.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PathEval {
    pub ema: f64,
    pub pm_ia: f64,
    pub pm_sa: f64,
}

/// Scores `pred` against `gt`; `None` (unparseable) scores zero everywhere.
///
/// Partial matches are over the first `|gt|` predicted points with `|gt|`
/// as denominator; extra predicted points only void the exact match.
pub fn path_metrics<P, G>(pred: Option<&[P]>, gt: &[G]) -> Result<PathEval, MetricError>
where
    P: PartialEq<G>,
{
    if gt.is_empty() {
        return Err(MetricError::Empty("ground-truth path"));
    }
    let Some(pred) = pred else {
        return Ok(PathEval::default());
    };
    let head = &pred[..pred.len().min(gt.len())];
    let in_order = head.iter().zip(gt).filter(|(p, g)| *p == *g).count();
    let anywhere = head.iter().filter(|p| gt.iter().any(|g| *p == g)).count();
    let exact = pred.len() == gt.len() && in_order == gt.len();
    let n = gt.len() as f64;
    Ok(PathEval {
        ema: if exact { 1.0 } else { 0.0 },
        pm_ia: anywhere as f64 / n,
        pm_sa: in_order as f64 / n,
    })
}

/// Fraction of samples whose prediction equals the ground truth exactly.
pub fn point_accuracy<P, G>(preds: &[Option<P>], gts: &[G]) -> Result<f64, MetricError>
where
    P: PartialEq<G>,
{
    if preds.len() != gts.len() {
        return Err(MetricError::LengthMismatch(preds.len(), gts.len()));
    }
    if gts.is_empty() {
        return Err(MetricError::Empty("point accuracy"));
    }
    let hits = preds
        .iter()
        .zip(gts)
        .filter(|(p, g)| p.as_ref().is_some_and(|p| p == *g))
        .count();
    Ok(hits as f64 / gts.len() as f64)
}

/// Accuracy at each path index; samples contribute only to indices within
/// their own ground truth.
pub fn positional_accuracy_curve<P, G>(samples: &[(Option<&[P]>, &[G])]) -> Vec<f64>
where
    P: PartialEq<G>,
{
    let len = samples.iter().map(|(_, g)| g.len()).max().unwrap_or(0);
    let mut hits = vec![0usize; len];
    let mut totals = vec![0usize; len];
    for (pred, gt) in samples {
        for (i, g) in gt.iter().enumerate() {
            totals[i] += 1;
            if pred.and_then(|p| p.get(i)).is_some_and(|p| p == g) {
                hits[i] += 1;
            }
        }
    }
    hits.iter()
        .zip(&totals)
        .map(|(h, t)| *h as f64 / *t as f64)
        .collect()
}
