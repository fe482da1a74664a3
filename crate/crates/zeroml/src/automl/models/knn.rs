//! k-nearest-neighbour prediction over the stored training matrix.
//! Euclidean distance; distance ties break to the lower training-row
//! index. Classification takes the majority vote among neighbours (vote
//! ties go to the smallest class index), regression the neighbour mean.

use serde::{Deserialize, Serialize};

use crate::data::Matrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnParams {
    pub k: usize,
    pub train_x: Matrix,
    /// Class indices (as f64) for classifiers, raw targets for regressors.
    pub train_y: Vec<f64>,
}

pub fn fit_knn(x: &Matrix, y: Vec<f64>, k: usize) -> KnnParams {
    KnnParams { k, train_x: x.clone(), train_y: y }
}

pub fn predict_knn_classifier(params: &KnnParams, x: &Matrix, n_classes: usize) -> Vec<usize> {
    (0..x.rows)
        .map(|r| {
            let mut counts = vec![0usize; n_classes];
            for idx in neighbors(params, x.row(r)) {
                counts[params.train_y[idx] as usize] += 1;
            }
            let mut best = 0usize;
            for class in 1..n_classes {
                if counts[class] > counts[best] {
                    best = class;
                }
            }
            best
        })
        .collect()
}

pub fn predict_knn_regressor(params: &KnnParams, x: &Matrix) -> Vec<f64> {
    (0..x.rows)
        .map(|r| {
            let idxs = neighbors(params, x.row(r));
            let n = idxs.len().max(1) as f64;
            idxs.iter().map(|&i| params.train_y[i]).sum::<f64>() / n
        })
        .collect()
}

/// Indices of the k nearest training rows (all rows if k exceeds them).
fn neighbors(params: &KnnParams, row: &[f64]) -> Vec<usize> {
    let mut dists: Vec<(f64, usize)> = (0..params.train_x.rows)
        .map(|t| (squared_distance(params.train_x.row(t), row), t))
        .collect();
    dists.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite distances").then(a.1.cmp(&b.1)));
    dists
        .into_iter()
        .take(params.k.min(params.train_x.rows))
        .map(|(_, idx)| idx)
        .collect()
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_neighbour_classifies_clusters() {
        let x = Matrix::from_rows(vec![
            vec![0.0, 0.0], vec![0.1, 0.0], vec![5.0, 5.0], vec![5.1, 5.0],
        ]);
        let params = fit_knn(&x, vec![0.0, 0.0, 1.0, 1.0], 3);
        let test = Matrix::from_rows(vec![vec![0.05, 0.0], vec![5.05, 5.0]]);
        assert_eq!(predict_knn_classifier(&params, &test, 2), vec![0, 1]);
    }

    #[test]
    fn regression_averages_neighbours() {
        let x = Matrix::from_rows(vec![vec![0.0], vec![1.0], vec![10.0]]);
        let params = fit_knn(&x, vec![1.0, 3.0, 100.0], 2);
        let preds = predict_knn_regressor(&params, &Matrix::from_rows(vec![vec![0.5]]));
        assert_eq!(preds, vec![2.0]);
    }

    #[test]
    fn k_larger_than_training_set_uses_all_rows() {
        let x = Matrix::from_rows(vec![vec![0.0], vec![1.0]]);
        let params = fit_knn(&x, vec![2.0, 4.0], 7);
        let preds = predict_knn_regressor(&params, &Matrix::from_rows(vec![vec![0.3]]));
        assert_eq!(preds, vec![3.0]);
    }

    #[test]
    fn vote_tie_prefers_smaller_class() {
        let x = Matrix::from_rows(vec![vec![-1.0], vec![1.0]]);
        let params = fit_knn(&x, vec![1.0, 0.0], 2);
        // Both neighbours used: one vote each, tie -> class 0.
        assert_eq!(predict_knn_classifier(&params, &Matrix::from_rows(vec![vec![0.0]]), 2), vec![0]);
    }

    #[test]
    fn distance_tie_prefers_lower_row_index() {
        let x = Matrix::from_rows(vec![vec![1.0], vec![-1.0], vec![9.0]]);
        let params = fit_knn(&x, vec![5.0, 7.0, 9.0], 1);
        // Rows 0 and 1 are equidistant from 0; row 0 wins.
        assert_eq!(predict_knn_regressor(&params, &Matrix::from_rows(vec![vec![0.0]])), vec![5.0]);
    }
}
