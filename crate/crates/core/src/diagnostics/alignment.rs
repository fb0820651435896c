use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use super::{DiagnosticsError, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlignmentGap {
    pub mean_matched_cosine: f64,
    pub mean_mismatched_cosine: f64,
    pub gap: f64,
}

fn unit_rows(m: &Matrix, name: &str) -> Result<Vec<Vec<f64>>, DiagnosticsError> {
    (0..m.rows())
        .map(|i| {
            let r = m.row_f64(i);
            let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm == 0.0 {
                return Err(DiagnosticsError::ZeroRow(format!("{name} row {i}")));
            }
            Ok(r.into_iter().map(|v| v / norm).collect())
        })
        .collect()
}

/// Mean cosine between paired rows versus between all unpaired rows.
///
/// The unpaired sum is `(Σ ĥ_i) · (Σ ĉ_j)` minus the paired terms.
pub fn alignment_gap(h: &Matrix, c: &Matrix) -> Result<AlignmentGap, DiagnosticsError> {
    if h.rows() != c.rows() || h.cols() != c.cols() {
        return Err(DiagnosticsError::Dimension(format!(
            "H is {}x{}, C is {}x{}",
            h.rows(),
            h.cols(),
            c.rows(),
            c.cols()
        )));
    }
    let n = h.rows();
    if n < 2 {
        return Err(DiagnosticsError::Dimension("need at least two row pairs".into()));
    }
    let (hu, cu) = (unit_rows(h, "H")?, unit_rows(c, "C")?);
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let matched_sum: f64 = hu.iter().zip(&cu).map(|(a, b)| dot(a, b)).sum();
    let sum_rows = |rows: &[Vec<f64>]| {
        let mut s = vec![0.0; h.cols()];
        for r in rows {
            for (acc, v) in s.iter_mut().zip(r) {
                *acc += v;
            }
        }
        s
    };
    let all_pairs = dot(&sum_rows(&hu), &sum_rows(&cu));
    let matched = matched_sum / n as f64;
    let mismatched = (all_pairs - matched_sum) / (n * (n - 1)) as f64;
    Ok(AlignmentGap {
        mean_matched_cosine: matched,
        mean_mismatched_cosine: mismatched,
        gap: matched - mismatched,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClusterStats {
    pub intra_class_mean_dist: f64,
    pub inter_class_mean_dist: f64,
    /// `intra / inter`, defined as 0 when `inter` is 0.
    pub ratio: f64,
}

/// Mean Euclidean distance over same-label and different-label row pairs.
pub fn cluster_stats(x: &Matrix, labels: &[String]) -> Result<ClusterStats, DiagnosticsError> {
    if x.rows() != labels.len() {
        return Err(DiagnosticsError::Dimension(format!(
            "{} rows, {} labels",
            x.rows(),
            labels.len()
        )));
    }
    if labels.iter().all(|l| *l == labels[0]) {
        return Err(DiagnosticsError::SingleClass);
    }
    let rows: Vec<Vec<f64>> = (0..x.rows()).map(|i| x.row_f64(i)).collect();
    let (mut intra, mut inter) = ((0.0, 0usize), (0.0, 0usize));
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let d = rows[i]
                .iter()
                .zip(&rows[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let acc = if labels[i] == labels[j] { &mut intra } else { &mut inter };
            acc.0 += d;
            acc.1 += 1;
        }
    }
    let mean = |(s, n): (f64, usize)| if n == 0 { 0.0 } else { s / n as f64 };
    let (intra, inter) = (mean(intra), mean(inter));
    Ok(ClusterStats {
        intra_class_mean_dist: intra,
        inter_class_mean_dist: inter,
        ratio: if inter == 0.0 { 0.0 } else { intra / inter },
    })
}

/// Scores on the two leading principal axes of the centered rows. Each
/// axis is signed so its largest-magnitude score is positive.
pub fn principal_projection(x: &Matrix) -> Vec<[f64; 2]> {
    let (n, d) = (x.rows(), x.cols());
    if n == 0 {
        return Vec::new();
    }
    let mut centered = DMatrix::<f64>::from_fn(n, d, |i, j| x.row(i)[j] as f64);
    for j in 0..d {
        let mean = centered.column(j).mean();
        centered.column_mut(j).add_scalar_mut(-mean);
    }
    // eigen-decompose the smaller Gram matrix
    let scores: DMatrix<f64> = if n <= d {
        let gram = &centered * centered.transpose();
        let eig = SymmetricEigen::new(gram);
        let mut s = DMatrix::zeros(n, 2);
        for (k, idx) in top2(eig.eigenvalues.as_slice()).into_iter().enumerate() {
            let scale = eig.eigenvalues[idx].max(0.0).sqrt();
            s.set_column(k, &(eig.eigenvectors.column(idx) * scale));
        }
        s
    } else {
        let cov = centered.transpose() * &centered;
        let eig = SymmetricEigen::new(cov);
        let mut s = DMatrix::zeros(n, 2);
        for (k, idx) in top2(eig.eigenvalues.as_slice()).into_iter().enumerate() {
            s.set_column(k, &(&centered * eig.eigenvectors.column(idx)));
        }
        s
    };
    let mut out = vec![[0.0; 2]; n];
    for k in 0..2 {
        let col = scores.column(k);
        let pivot = col.iter().copied().fold(0.0f64, |m, v| if v.abs() > m.abs() { v } else { m });
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            // clean negative zero so CSV output is stable
            out[i][k] = sign * col[i] + 0.0;
        }
    }
    out
}

/// Indices of the two largest eigenvalues (fewer than two dims pad with a
/// zero axis).
fn top2(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|a, b| values[*b].total_cmp(&values[*a]).then(a.cmp(b)));
    idx.truncate(2);
    idx
}

/// Writes `id,label,pc1,pc2` rows.
pub fn write_projection_csv(
    path: &Path,
    ids: &[String],
    labels: &[String],
    scores: &[[f64; 2]],
) -> Result<(), DiagnosticsError> {
    if ids.len() != scores.len() || labels.len() != scores.len() {
        return Err(DiagnosticsError::Dimension(format!(
            "{} ids, {} labels, {} projected rows",
            ids.len(),
            labels.len(),
            scores.len()
        )));
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| DiagnosticsError::Csv(e.to_string()))?;
    w.write_record(["id", "label", "pc1", "pc2"])
        .map_err(|e| DiagnosticsError::Csv(e.to_string()))?;
    for ((id, label), s) in ids.iter().zip(labels).zip(scores) {
        w.write_record([id.as_str(), label.as_str(), &s[0].to_string(), &s[1].to_string()])
            .map_err(|e| DiagnosticsError::Csv(e.to_string()))?;
    }
    w.flush().map_err(|e| DiagnosticsError::Csv(e.to_string()))
}
