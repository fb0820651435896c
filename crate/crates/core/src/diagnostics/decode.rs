use serde::Serialize;

use super::{DiagnosticsError, Matrix};

pub const DEFAULT_TOP_K: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecodedToken {
    pub index: usize,
    pub token: String,
    pub probability: f64,
}

/// Softmax with the maximum subtracted first.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exp.iter().sum();
    exp.iter().map(|e| e / sum).collect()
}

/// `h · Eᵀ`, one logit per vocabulary row.
pub fn token_logits(h: &[f32], embeddings: &Matrix) -> Result<Vec<f64>, DiagnosticsError> {
    if h.len() != embeddings.cols() {
        return Err(DiagnosticsError::Dimension(format!(
            "feature has {} dims, embeddings have {}",
            h.len(),
            embeddings.cols()
        )));
    }
    let logits: Vec<f64> = (0..embeddings.rows())
        .map(|r| {
            embeddings
                .row(r)
                .iter()
                .zip(h)
                .map(|(e, x)| *e as f64 * *x as f64)
                .sum()
        })
        .collect();
    if logits.iter().any(|z| !z.is_finite()) {
        return Err(DiagnosticsError::NonFinite("logits".into()));
    }
    Ok(logits)
}

/// Top-`k` vocabulary tokens for one feature row with their softmax
/// probabilities, most probable first; equal logits rank the lower row first.
pub fn decode_feature(
    h: &[f32],
    embeddings: &Matrix,
    vocab: &[String],
    k: usize,
) -> Result<Vec<DecodedToken>, DiagnosticsError> {
    if vocab.len() != embeddings.rows() {
        return Err(DiagnosticsError::Dimension(format!(
            "vocab has {} tokens, embeddings have {} rows",
            vocab.len(),
            embeddings.rows()
        )));
    }
    if k == 0 || k > vocab.len() {
        return Err(DiagnosticsError::Dimension(format!(
            "k = {k} outside 1..={}",
            vocab.len()
        )));
    }
    let logits = token_logits(h, embeddings)?;
    let probs = softmax(&logits);
    let mut order: Vec<usize> = (0..logits.len()).collect();
    // ranking on logits: softmax is monotone, and logits do not underflow
    order.sort_by(|a, b| logits[*b].total_cmp(&logits[*a]).then(a.cmp(b)));
    Ok(order
        .into_iter()
        .take(k)
        .map(|i| DecodedToken {
            index: i,
            token: vocab[i].clone(),
            probability: probs[i],
        })
        .collect())
}
