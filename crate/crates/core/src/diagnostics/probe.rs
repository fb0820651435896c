use serde::{Deserialize, Serialize};

use super::{DiagnosticsError, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    pub learning_rate: f64,
    pub l2: f64,
    pub grad_tol: f64,
    pub max_iter: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            learning_rate: 0.1,
            l2: 1e-4,
            grad_tol: 1e-6,
            max_iter: 5000,
        }
    }
}

/// Multinomial logistic-regression probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub classes: Vec<String>,
    /// `classes × features`, row-major.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
    pub features: usize,
    pub final_loss: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Parameters of a linear softmax model: `weights` is `classes × features`.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Params {
    pub fn zeros(classes: usize, features: usize) -> Self {
        Params {
            weights: vec![0.0; classes * features],
            bias: vec![0.0; classes],
        }
    }

    fn norm(&self) -> f64 {
        self.weights.iter().chain(&self.bias).map(|g| g * g).sum::<f64>().sqrt()
    }
}

fn scores(x: &[f32], p: &Params, out: &mut [f64]) {
    let d = x.len();
    for (c, o) in out.iter_mut().enumerate() {
        let w = &p.weights[c * d..(c + 1) * d];
        *o = p.bias[c] + w.iter().zip(x).map(|(a, b)| a * *b as f64).sum::<f64>();
    }
}

/// Mean cross-entropy plus `l2 / 2 · ‖W‖²` (bias unregularized), and its
/// gradient with respect to `(W, b)`.
pub fn loss_and_gradient(x: &Matrix, y: &[usize], p: &Params, l2: f64) -> (f64, Params) {
    let (n, d) = (x.rows(), x.cols());
    let k = p.bias.len();
    let mut grad = Params::zeros(k, d);
    let mut z = vec![0.0; k];
    let mut loss = 0.0;
    for (i, &label) in y.iter().enumerate() {
        let row = x.row(i);
        scores(row, p, &mut z);
        let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = z.iter().map(|v| (v - max).exp()).sum();
        let log_sum = max + sum.ln();
        loss += log_sum - z[label];
        for c in 0..k {
            let coef = (z[c] - log_sum).exp() - if c == label { 1.0 } else { 0.0 };
            grad.bias[c] += coef;
            let g = &mut grad.weights[c * d..(c + 1) * d];
            for (gv, xv) in g.iter_mut().zip(row) {
                *gv += coef * *xv as f64;
            }
        }
    }
    let inv = 1.0 / n as f64;
    loss *= inv;
    for (g, w) in grad.weights.iter_mut().zip(&p.weights) {
        *g = *g * inv + l2 * w;
    }
    for g in grad.bias.iter_mut() {
        *g *= inv;
    }
    loss += 0.5 * l2 * p.weights.iter().map(|w| w * w).sum::<f64>();
    (loss, grad)
}

/// Sorted distinct labels and each row's class index.
pub fn encode_labels(labels: &[String]) -> (Vec<String>, Vec<usize>) {
    let mut classes: Vec<String> = labels.to_vec();
    classes.sort();
    classes.dedup();
    let idx = labels
        .iter()
        .map(|l| classes.binary_search(l).expect("label listed"))
        .collect();
    (classes, idx)
}

/// Full-batch gradient descent from zero weights. A step that raises the
/// loss is rejected and the learning rate halved; training stops when the
/// gradient norm drops below `grad_tol` or after `max_iter` iterations.
pub fn train_linear_probe(x: &Matrix, labels: &[String], cfg: &ProbeConfig) -> Result<Probe, DiagnosticsError> {
    if x.rows() != labels.len() {
        return Err(DiagnosticsError::Dimension(format!(
            "{} feature rows, {} labels",
            x.rows(),
            labels.len()
        )));
    }
    let (classes, y) = encode_labels(labels);
    if classes.len() < 2 {
        return Err(DiagnosticsError::SingleClass);
    }
    let mut p = Params::zeros(classes.len(), x.cols());
    let mut lr = cfg.learning_rate;
    let (mut loss, mut grad) = loss_and_gradient(x, &y, &p, cfg.l2);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iter {
        if grad.norm() < cfg.grad_tol {
            converged = true;
            break;
        }
        iterations += 1;
        let candidate = Params {
            weights: p.weights.iter().zip(&grad.weights).map(|(w, g)| w - lr * g).collect(),
            bias: p.bias.iter().zip(&grad.bias).map(|(b, g)| b - lr * g).collect(),
        };
        let (new_loss, new_grad) = loss_and_gradient(x, &y, &candidate, cfg.l2);
        if new_loss > loss {
            lr *= 0.5;
            if lr < f64::MIN_POSITIVE {
                break;
            }
            continue;
        }
        p = candidate;
        loss = new_loss;
        grad = new_grad;
    }
    if !converged && grad.norm() < cfg.grad_tol {
        converged = true;
    }
    Ok(Probe {
        classes,
        features: x.cols(),
        grad_norm: grad.norm(),
        weights: p.weights,
        bias: p.bias,
        final_loss: loss,
        iterations,
        converged,
    })
}

impl Probe {
    /// Argmax class index per row; ties go to the lower class index.
    pub fn predict(&self, x: &Matrix) -> Result<Vec<usize>, DiagnosticsError> {
        if x.cols() != self.features {
            return Err(DiagnosticsError::Dimension(format!(
                "probe expects {} features, got {}",
                self.features,
                x.cols()
            )));
        }
        let p = Params {
            weights: self.weights.clone(),
            bias: self.bias.clone(),
        };
        let mut z = vec![0.0; self.classes.len()];
        Ok((0..x.rows())
            .map(|i| {
                scores(x.row(i), &p, &mut z);
                let mut best = 0;
                for c in 1..z.len() {
                    if z[c] > z[best] {
                        best = c;
                    }
                }
                best
            })
            .collect())
    }
}

/// Fraction of rows whose predicted class name equals the label; labels
/// unseen in training always count as wrong.
pub fn probe_accuracy(probe: &Probe, x: &Matrix, labels: &[String]) -> Result<f64, DiagnosticsError> {
    if x.rows() != labels.len() {
        return Err(DiagnosticsError::Dimension(format!(
            "{} feature rows, {} labels",
            x.rows(),
            labels.len()
        )));
    }
    if labels.is_empty() {
        return Err(DiagnosticsError::Dimension("no rows to score".into()));
    }
    let pred = probe.predict(x)?;
    let hits = pred
        .iter()
        .zip(labels)
        .filter(|(p, l)| probe.classes[**p] == **l)
        .count();
    Ok(hits as f64 / labels.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_distr::{Distribution, StandardNormal};

    fn normal<R: Rng>(rng: &mut R) -> f64 {
        StandardNormal.sample(rng)
    }

    fn labels(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn finite_difference_gradient() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let x = Matrix::new(3, 4, (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let y = [0usize, 2, 1];
        let p = Params {
            weights: (0..12).map(|_| rng.gen_range(-0.5..0.5)).collect(),
            bias: (0..3).map(|_| rng.gen_range(-0.5..0.5)).collect(),
        };
        let l2 = 0.01;
        let (_, g) = loss_and_gradient(&x, &y, &p, l2);
        let h = 1e-6;
        let analytic: Vec<f64> = g.weights.iter().chain(&g.bias).copied().collect();
        for (j, a) in analytic.iter().enumerate() {
            let bump = |delta: f64| {
                let mut q = p.clone();
                if j < 12 { q.weights[j] += delta } else { q.bias[j - 12] += delta }
                loss_and_gradient(&x, &y, &q, l2).0
            };
            let numeric = (bump(h) - bump(-h)) / (2.0 * h);
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-8);
            assert!(rel < 1e-4, "param {j}: {a} vs {numeric}");
        }
    }

    #[test]
    fn separable_blobs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let mut data = Vec::new();
        let mut ys = Vec::new();
        for i in 0..500 {
            let c = i % 2;
            let center = if c == 0 { -2.0 } else { 2.0 };
            data.push((center + 0.5 * normal(&mut rng)) as f32);
            data.push((0.5 * normal(&mut rng)) as f32);
            ys.push(format!("c{c}"));
        }
        let x = Matrix::new(500, 2, data).unwrap();
        let probe = train_linear_probe(&x, &ys, &ProbeConfig::default()).unwrap();
        assert!(probe_accuracy(&probe, &x, &ys).unwrap() >= 0.99);
    }

    #[test]
    fn deterministic() {
        let x = Matrix::new(4, 1, vec![-1.0, -0.5, 0.5, 1.0]).unwrap();
        let y = labels(&["a", "a", "b", "b"]);
        let a = train_linear_probe(&x, &y, &ProbeConfig::default()).unwrap();
        let b = train_linear_probe(&x, &y, &ProbeConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn zero_probe_ties_to_class_zero() {
        let probe = Probe {
            classes: labels(&["a", "b"]),
            weights: vec![0.0; 4],
            bias: vec![0.0; 2],
            features: 2,
            final_loss: 0.0,
            grad_norm: 0.0,
            iterations: 0,
            converged: true,
        };
        let x = Matrix::new(4, 2, vec![1.0, 0.0, 0.0, 1.0, 2.0, 2.0, -1.0, 3.0]).unwrap();
        assert_eq!(probe.predict(&x).unwrap(), vec![0; 4]);
        assert_eq!(probe_accuracy(&probe, &x, &labels(&["a", "b", "a", "b"])).unwrap(), 0.5);
    }

    #[test]
    fn identity_probe() {
        let probe = Probe {
            classes: labels(&["a", "b", "c"]),
            weights: vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
            bias: vec![0.0; 3],
            features: 3,
            final_loss: 0.0,
            grad_norm: 0.0,
            iterations: 0,
            converged: true,
        };
        let x = Matrix::new(3, 3, vec![0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0]).unwrap();
        assert_eq!(probe_accuracy(&probe, &x, &labels(&["c", "a", "b"])).unwrap(), 1.0);
    }

    #[test]
    fn input_errors() {
        let x = Matrix::new(2, 1, vec![0.0, 1.0]).unwrap();
        assert!(matches!(
            train_linear_probe(&x, &labels(&["a", "a"]), &ProbeConfig::default()),
            Err(DiagnosticsError::SingleClass)
        ));
        assert!(train_linear_probe(&x, &labels(&["a"]), &ProbeConfig::default()).is_err());
    }

    #[test]
    fn loss_never_increases_across_accepted_steps() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let x = Matrix::new(60, 3, (0..180).map(|_| rng.gen_range(-2.0..2.0)).collect()).unwrap();
        let ys: Vec<String> = (0..60).map(|i| format!("c{}", i % 3)).collect();
        let mut last = f64::INFINITY;
        for iters in [0, 1, 2, 5, 10, 50, 200] {
            let cfg = ProbeConfig { max_iter: iters, ..ProbeConfig::default() };
            let p = train_linear_probe(&x, &ys, &cfg).unwrap();
            assert!(p.final_loss <= last + 1e-15);
            last = p.final_loss;
        }
    }
}
