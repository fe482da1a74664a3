//! L2-regularized logistic regression trained by full-batch gradient
//! descent: learning rate 0.1, 200 epochs, zero-initialized weights, bias
//! unpenalized. Multiclass problems train one-vs-rest and predict the
//! argmax probability (ties go to the smaller class index).

use serde::{Deserialize, Serialize};

use crate::data::Matrix;

const LEARNING_RATE: f64 = 0.1;
const EPOCHS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub n_classes: usize,
    /// One weight row per one-vs-rest subproblem, bias last. Binary
    /// problems store a single row; empty means a constant predictor
    /// (single-class training data) that always answers class 0.
    pub weights: Vec<Vec<f64>>,
}

pub fn fit_logistic(x: &Matrix, y: &[usize], n_classes: usize, l2: f64) -> LogisticParams {
    let mut distinct: Vec<usize> = y.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() <= 1 {
        // Single-class data: constant predictor, still a successful fit.
        return LogisticParams { n_classes: n_classes.max(1), weights: Vec::new() };
    }
    if n_classes == 2 {
        let targets: Vec<f64> = y.iter().map(|&c| if c == 1 { 1.0 } else { 0.0 }).collect();
        LogisticParams { n_classes, weights: vec![train_binary(x, &targets, l2)] }
    } else {
        let weights = (0..n_classes)
            .map(|class| {
                let targets: Vec<f64> =
                    y.iter().map(|&c| if c == class { 1.0 } else { 0.0 }).collect();
                train_binary(x, &targets, l2)
            })
            .collect();
        LogisticParams { n_classes, weights }
    }
}

pub fn predict_logistic(params: &LogisticParams, x: &Matrix) -> Vec<usize> {
    if params.weights.is_empty() {
        return vec![0; x.rows];
    }
    if params.n_classes == 2 {
        let w = &params.weights[0];
        (0..x.rows)
            .map(|r| usize::from(sigmoid(dot_with_bias(x.row(r), w)) > 0.5))
            .collect()
    } else {
        (0..x.rows)
            .map(|r| {
                let row = x.row(r);
                let mut best = 0usize;
                let mut best_p = f64::NEG_INFINITY;
                for (class, w) in params.weights.iter().enumerate() {
                    let p = sigmoid(dot_with_bias(row, w));
                    if p > best_p {
                        best_p = p;
                        best = class;
                    }
                }
                best
            })
            .collect()
    }
}

fn train_binary(x: &Matrix, targets: &[f64], l2: f64) -> Vec<f64> {
    let mut w = vec![0.0; x.cols + 1];
    for _ in 0..EPOCHS {
        let grad = binary_grad(x, targets, &w, l2);
        for (wi, gi) in w.iter_mut().zip(&grad) {
            *wi -= LEARNING_RATE * gi;
        }
    }
    w
}

/// Mean cross-entropy plus (l2/2)·||w||² over non-bias weights. Kept as a
/// standalone function so gradient tests can difference it directly.
pub fn binary_loss(x: &Matrix, targets: &[f64], w: &[f64], l2: f64) -> f64 {
    let n = x.rows as f64;
    let mut loss = 0.0;
    for r in 0..x.rows {
        let z = dot_with_bias(x.row(r), w);
        // -[y ln σ(z) + (1-y) ln σ(-z)] = y·softplus(-z) + (1-y)·softplus(z)
        loss += targets[r] * softplus(-z) + (1.0 - targets[r]) * softplus(z);
    }
    loss /= n;
    let reg: f64 = w[..w.len() - 1].iter().map(|wi| wi * wi).sum();
    loss + 0.5 * l2 * reg
}

/// Analytic gradient of [`binary_loss`].
pub fn binary_grad(x: &Matrix, targets: &[f64], w: &[f64], l2: f64) -> Vec<f64> {
    let n = x.rows as f64;
    let mut grad = vec![0.0; w.len()];
    for r in 0..x.rows {
        let row = x.row(r);
        let err = sigmoid(dot_with_bias(row, w)) - targets[r];
        for (g, v) in grad.iter_mut().zip(row) {
            *g += err * v;
        }
        *grad.last_mut().expect("bias present") += err;
    }
    for g in grad.iter_mut() {
        *g /= n;
    }
    for (g, wi) in grad.iter_mut().zip(w).take(w.len() - 1) {
        *g += l2 * wi;
    }
    grad
}

fn dot_with_bias(row: &[f64], w: &[f64]) -> f64 {
    let mut z = w[w.len() - 1];
    for (v, wi) in row.iter().zip(w) {
        z += v * wi;
    }
    z
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn softplus(z: f64) -> f64 {
    // ln(1 + e^z), stable for large |z|.
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: Vec<Vec<f64>>) -> Matrix {
        Matrix::from_rows(rows)
    }

    #[test]
    fn separable_1d_data_reaches_perfect_training_accuracy() {
        // Class 0 at x <= -1, class 1 at x >= 1: margin 2.
        let x = matrix(vec![
            vec![-3.0], vec![-2.0], vec![-1.0],
            vec![1.0], vec![2.0], vec![3.0],
        ]);
        let y = vec![0, 0, 0, 1, 1, 1];
        let params = fit_logistic(&x, &y, 2, 0.0);
        let preds = predict_logistic(&params, &x);
        assert_eq!(preds, y);
    }

    #[test]
    fn single_class_data_falls_back_to_constant() {
        let x = matrix(vec![vec![1.0], vec![2.0]]);
        let params = fit_logistic(&x, &[0, 0], 1, 0.1);
        assert!(params.weights.is_empty());
        assert_eq!(predict_logistic(&params, &x), vec![0, 0]);
    }

    #[test]
    fn multiclass_one_vs_rest() {
        // Three well-separated clusters on a line.
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..5 {
            rows.push(vec![-10.0 + i as f64 * 0.1]);
            y.push(0);
            rows.push(vec![0.0 + i as f64 * 0.1]);
            y.push(1);
            rows.push(vec![10.0 + i as f64 * 0.1]);
            y.push(2);
        }
        let x = matrix(rows);
        let params = fit_logistic(&x, &y, 3, 0.0);
        assert_eq!(params.weights.len(), 3);
        assert_eq!(predict_logistic(&params, &x), y);
    }

    #[test]
    fn fit_is_deterministic() {
        let x = matrix(vec![vec![-1.0, 0.5], vec![1.0, -0.5], vec![2.0, 0.0]]);
        let y = vec![0, 1, 1];
        let a = fit_logistic(&x, &y, 2, 0.1);
        let b = fit_logistic(&x, &y, 2, 0.1);
        assert_eq!(a, b);
    }

    #[test]
    fn regularization_shrinks_weights() {
        let x = matrix(vec![vec![-2.0], vec![-1.0], vec![1.0], vec![2.0]]);
        let y = vec![0, 0, 1, 1];
        let free = fit_logistic(&x, &y, 2, 0.0);
        let reg = fit_logistic(&x, &y, 2, 0.5);
        assert!(reg.weights[0][0].abs() < free.weights[0][0].abs());
    }
}
