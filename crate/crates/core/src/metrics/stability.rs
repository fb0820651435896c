use std::collections::BTreeSet;

use super::MetricError;

/// Lowercased alphanumeric runs; the default tokenizer for token stability.
pub fn token_set(text: &str) -> BTreeSet<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(String::from)
        .collect()
}

/// Jaccard similarity; two empty sets are identical.
pub fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    let inter = a.intersection(b).count();
    let union = a.len() + b.len() - inter;
    inter as f64 / union as f64
}

/// Mean Jaccard similarity over all ordered pairs, self-pairs included.
pub fn token_stability_sets(sets: &[BTreeSet<String>]) -> Result<f64, MetricError> {
    if sets.is_empty() {
        return Err(MetricError::Empty("token stability"));
    }
    let n = sets.len();
    let mut off_diagonal = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            off_diagonal += jaccard(&sets[i], &sets[j]);
        }
    }
    // diagonal pairs contribute 1 each; off-diagonal pairs are counted twice
    Ok((n as f64 + 2.0 * off_diagonal) / (n * n) as f64)
}

pub fn token_stability<S: AsRef<str>>(outputs: &[S]) -> Result<f64, MetricError> {
    let sets: Vec<_> = outputs.iter().map(|o| token_set(o.as_ref())).collect();
    token_stability_sets(&sets)
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Text to fixed-dimension vector.
pub trait Embedder: Sync {
    fn embed(&self, text: &str) -> Result<Vec<f64>, String>;
}

/// Offline embedder: token counts hashed into `dim` buckets (FNV-1a).
/// Counts are non-negative and empty text embeds a placeholder token, so
/// vectors are never zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HashedBagOfWords {
    pub dim: usize,
}

impl Default for HashedBagOfWords {
    fn default() -> Self {
        HashedBagOfWords { dim: 256 }
    }
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

impl Embedder for HashedBagOfWords {
    fn embed(&self, text: &str) -> Result<Vec<f64>, String> {
        if self.dim == 0 {
            return Err("embedding dimension must be positive".into());
        }
        let mut v = vec![0.0; self.dim];
        let lowered = text.to_lowercase();
        let mut any = false;
        for token in lowered.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()) {
            v[(fnv1a(token) % self.dim as u64) as usize] += 1.0;
            any = true;
        }
        if !any {
            v[(fnv1a("<empty>") % self.dim as u64) as usize] = 1.0;
        }
        Ok(v)
    }
}

/// Mean cosine similarity over all ordered pairs, self-pairs included.
///
/// With unit vectors u_i the double sum equals `|sum u_i|^2 / N^2`.
/// `ids` label the vectors in errors.
pub fn semantic_stability_vectors<S: AsRef<str>>(ids: &[S], vectors: &[Vec<f64>]) -> Result<f64, MetricError> {
    if vectors.is_empty() {
        return Err(MetricError::Empty("semantic stability"));
    }
    if ids.len() != vectors.len() {
        return Err(MetricError::LengthMismatch(ids.len(), vectors.len()));
    }
    let dim = vectors[0].len();
    let mut sum = vec![0.0; dim];
    for (id, v) in ids.iter().zip(vectors) {
        if v.len() != dim {
            return Err(MetricError::DimensionMismatch(dim, v.len()));
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(MetricError::DegenerateEmbedding {
                id: id.as_ref().to_string(),
            });
        }
        for (s, x) in sum.iter_mut().zip(v) {
            *s += x / norm;
        }
    }
    let n = vectors.len() as f64;
    Ok(sum.iter().map(|s| s * s).sum::<f64>() / (n * n))
}

/// Embeds `(id, text)` outputs and scores their semantic stability.
pub fn semantic_stability<S: AsRef<str>, T: AsRef<str>>(
    outputs: &[(S, T)],
    embedder: &dyn Embedder,
) -> Result<f64, MetricError> {
    let mut vectors = Vec::with_capacity(outputs.len());
    for (id, text) in outputs {
        let v = embedder.embed(text.as_ref()).map_err(|message| MetricError::Embedding {
            id: id.as_ref().to_string(),
            message,
        })?;
        vectors.push(v);
    }
    let ids: Vec<&str> = outputs.iter().map(|(id, _)| id.as_ref()).collect();
    semantic_stability_vectors(&ids, &vectors)
}
