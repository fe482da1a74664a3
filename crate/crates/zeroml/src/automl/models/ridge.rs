//! Ridge regression solved in closed form: (XᵀX + l2·D) w = Xᵀy with an
//! appended bias column and D the identity zeroed at the bias (the bias is
//! unpenalized). The system is solved by Gaussian elimination with partial
//! pivoting; a singular system is a fit error.

use serde::{Deserialize, Serialize};

use crate::data::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeParams {
    /// Length n_features + 1; bias last.
    pub weights: Vec<f64>,
}

pub fn fit_ridge(x: &Matrix, y: &[f64], l2: f64) -> Result<RidgeParams, String> {
    let d = x.cols + 1;
    // Normal equations over the design matrix [X | 1].
    let mut a = vec![vec![0.0f64; d]; d];
    let mut b = vec![0.0f64; d];
    for r in 0..x.rows {
        let row = x.row(r);
        for i in 0..d {
            let xi = if i < x.cols { row[i] } else { 1.0 };
            b[i] += xi * y[r];
            for j in i..d {
                let xj = if j < x.cols { row[j] } else { 1.0 };
                a[i][j] += xi * xj;
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            a[i][j] = a[j][i];
        }
    }
    for (i, row) in a.iter_mut().enumerate().take(x.cols) {
        row[i] += l2;
    }
    let weights =
        solve(a, b).ok_or_else(|| "singular normal equations (try l2 > 0)".to_string())?;
    if weights.iter().any(|w| !w.is_finite()) {
        return Err("non-finite ridge solution".to_string());
    }
    Ok(RidgeParams { weights })
}

pub fn predict_ridge(params: &RidgeParams, x: &Matrix) -> Vec<f64> {
    let d = params.weights.len();
    (0..x.rows)
        .map(|r| {
            let row = x.row(r);
            let mut out = params.weights[d - 1];
            for (v, w) in row.iter().zip(&params.weights) {
                out += v * w;
            }
            out
        })
        .collect()
}

/// Gaussian elimination with partial pivoting; None when singular.
fn solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                a[i][col]
                    .abs()
                    .partial_cmp(&a[j][col].abs())
                    .expect("finite matrix entries")
            })
            .expect("non-empty range");
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc -= a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_linear_weights() {
        // y = 3*x1 - 2*x2 with no noise; l2 = 0 must recover (3, -2, 0)
        // to near machine precision.
        let rows: Vec<Vec<f64>> = vec![
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
            vec![2.0, -1.0],
            vec![-1.0, 2.0],
        ];
        let y: Vec<f64> = rows.iter().map(|r| 3.0 * r[0] - 2.0 * r[1]).collect();
        let x = Matrix::from_rows(rows);
        let params = fit_ridge(&x, &y, 0.0).unwrap();
        assert!((params.weights[0] - 3.0).abs() < 1e-8, "{:?}", params.weights);
        assert!((params.weights[1] + 2.0).abs() < 1e-8);
        assert!(params.weights[2].abs() < 1e-8);
    }

    #[test]
    fn bias_is_unpenalized() {
        // Constant target: heavy regularization must not shrink the bias.
        let x = Matrix::from_rows(vec![vec![1.0], vec![2.0], vec![3.0]]);
        let y = vec![10.0, 10.0, 10.0];
        let params = fit_ridge(&x, &y, 100.0).unwrap();
        assert!((params.weights[1] - 10.0).abs() < 0.2, "{:?}", params.weights);
        assert!(params.weights[0].abs() < 0.1);
    }

    #[test]
    fn duplicate_feature_with_zero_l2_is_singular() {
        let x = Matrix::from_rows(vec![vec![1.0, 1.0], vec![2.0, 2.0], vec![3.0, 3.0]]);
        let y = vec![1.0, 2.0, 3.0];
        assert!(fit_ridge(&x, &y, 0.0).is_err());
        assert!(fit_ridge(&x, &y, 0.1).is_ok());
    }

    #[test]
    fn prediction_applies_weights_and_bias() {
        let params = RidgeParams { weights: vec![2.0, -1.0, 0.5] };
        let x = Matrix::from_rows(vec![vec![1.0, 1.0], vec![0.0, 2.0]]);
        assert_eq!(predict_ridge(&params, &x), vec![1.5, -1.5]);
    }
}
