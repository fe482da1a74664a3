//! Greedy CART decision trees. Classification splits minimize weighted
//! gini impurity, regression splits minimize weighted variance. Candidate
//! thresholds are the midpoints of consecutive sorted distinct feature
//! values; rows with value <= threshold go left. A node with fewer than
//! two rows, a pure target, the depth cap reached, or no candidate
//! thresholds becomes a leaf. Ties between splits keep the lowest feature
//! index, then the lowest threshold.

use serde::{Deserialize, Serialize};

use crate::data::Matrix;

/// Flat node. Internal nodes have `feature >= 0` and child indices; leaves
/// have `feature == -1`, `left == right == -1` and carry `leaf_value`
/// (class index as f64 for classifiers, mean target for regressors).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeNode {
    pub feature: i32,
    pub threshold: f64,
    pub left: i32,
    pub right: i32,
    pub leaf_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub nodes: Vec<TreeNode>,
}

impl TreeParams {
    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], idx: usize) -> usize {
            let node = &nodes[idx];
            if node.feature < 0 {
                return 0;
            }
            1 + walk(nodes, node.left as usize).max(walk(nodes, node.right as usize))
        }
        if self.nodes.is_empty() {
            0
        } else {
            walk(&self.nodes, 0)
        }
    }
}

enum Target<'a> {
    Classes { y: &'a [usize], n_classes: usize },
    Numeric(&'a [f64]),
}

pub fn fit_tree_classifier(x: &Matrix, y: &[usize], n_classes: usize, max_depth: usize) -> TreeParams {
    fit(x, &Target::Classes { y, n_classes }, max_depth)
}

pub fn fit_tree_regressor(x: &Matrix, y: &[f64], max_depth: usize) -> TreeParams {
    fit(x, &Target::Numeric(y), max_depth)
}

pub fn predict_tree(params: &TreeParams, x: &Matrix) -> Vec<f64> {
    (0..x.rows)
        .map(|r| {
            let row = x.row(r);
            let mut idx = 0usize;
            loop {
                let node = &params.nodes[idx];
                if node.feature < 0 {
                    return node.leaf_value;
                }
                idx = if row[node.feature as usize] <= node.threshold {
                    node.left as usize
                } else {
                    node.right as usize
                };
            }
        })
        .collect()
}

fn fit(x: &Matrix, target: &Target, max_depth: usize) -> TreeParams {
    let rows: Vec<usize> = (0..x.rows).collect();
    let mut nodes = Vec::new();
    build(x, target, &rows, max_depth, 0, &mut nodes);
    TreeParams { nodes }
}

/// Appends the subtree for `rows` and returns its root index.
fn build(
    x: &Matrix,
    target: &Target,
    rows: &[usize],
    max_depth: usize,
    depth: usize,
    nodes: &mut Vec<TreeNode>,
) -> usize {
    let make_leaf = |nodes: &mut Vec<TreeNode>| {
        nodes.push(TreeNode {
            feature: -1,
            threshold: 0.0,
            left: -1,
            right: -1,
            leaf_value: leaf_value(target, rows),
        });
        nodes.len() - 1
    };

    if rows.len() < 2 || depth >= max_depth || is_pure(target, rows) {
        return make_leaf(nodes);
    }
    let Some((feature, threshold)) = best_split(x, target, rows) else {
        return make_leaf(nodes);
    };

    let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
        rows.iter().partition(|&&r| x.get(r, feature) <= threshold);
    debug_assert!(!left_rows.is_empty() && !right_rows.is_empty());

    let idx = nodes.len();
    nodes.push(TreeNode {
        feature: feature as i32,
        threshold,
        left: -1,
        right: -1,
        leaf_value: 0.0,
    });
    let left = build(x, target, &left_rows, max_depth, depth + 1, nodes);
    let right = build(x, target, &right_rows, max_depth, depth + 1, nodes);
    nodes[idx].left = left as i32;
    nodes[idx].right = right as i32;
    idx
}

fn is_pure(target: &Target, rows: &[usize]) -> bool {
    match target {
        Target::Classes { y, .. } => rows.windows(2).all(|w| y[w[0]] == y[w[1]]),
        Target::Numeric(y) => rows.windows(2).all(|w| y[w[0]] == y[w[1]]),
    }
}

fn leaf_value(target: &Target, rows: &[usize]) -> f64 {
    match target {
        Target::Classes { y, n_classes } => {
            let mut counts = vec![0usize; *n_classes];
            for &r in rows {
                counts[y[r]] += 1;
            }
            // Majority class; ties keep the smallest class index.
            let mut best = 0usize;
            for class in 1..counts.len() {
                if counts[class] > counts[best] {
                    best = class;
                }
            }
            best as f64
        }
        Target::Numeric(y) => {
            if rows.is_empty() {
                0.0
            } else {
                rows.iter().map(|&r| y[r]).sum::<f64>() / rows.len() as f64
            }
        }
    }
}

/// Scan every (feature, midpoint) candidate and return the one minimizing
/// weighted child impurity. Incremental prefix statistics over rows sorted
/// by feature value keep the scan O(d · n log n).
fn best_split(x: &Matrix, target: &Target, rows: &[usize]) -> Option<(usize, f64)> {
    let n = rows.len();
    let mut best: Option<(f64, usize, f64)> = None; // (impurity, feature, threshold)

    for feature in 0..x.cols {
        let mut order: Vec<usize> = rows.to_vec();
        order.sort_by(|&a, &b| {
            x.get(a, feature)
                .partial_cmp(&x.get(b, feature))
                .expect("finite feature values")
        });

        match target {
            Target::Classes { y, n_classes } => {
                let mut left = vec![0usize; *n_classes];
                let mut right = vec![0usize; *n_classes];
                for &r in &order {
                    right[y[r]] += 1;
                }
                for i in 0..n - 1 {
                    let r = order[i];
                    left[y[r]] += 1;
                    right[y[r]] -= 1;
                    let (a, b) = (x.get(r, feature), x.get(order[i + 1], feature));
                    if a == b {
                        continue;
                    }
                    let threshold = midpoint(a, b);
                    let n_left = (i + 1) as f64;
                    let n_right = (n - i - 1) as f64;
                    let weighted =
                        (n_left * gini(&left) + n_right * gini(&right)) / n as f64;
                    consider(&mut best, weighted, feature, threshold);
                }
            }
            Target::Numeric(y) => {
                let (mut lsum, mut lsq) = (0.0f64, 0.0f64);
                let (mut rsum, mut rsq) = (0.0f64, 0.0f64);
                for &r in &order {
                    rsum += y[r];
                    rsq += y[r] * y[r];
                }
                for i in 0..n - 1 {
                    let r = order[i];
                    lsum += y[r];
                    lsq += y[r] * y[r];
                    rsum -= y[r];
                    rsq -= y[r] * y[r];
                    let (a, b) = (x.get(r, feature), x.get(order[i + 1], feature));
                    if a == b {
                        continue;
                    }
                    let threshold = midpoint(a, b);
                    let n_left = (i + 1) as f64;
                    let n_right = (n - i - 1) as f64;
                    let weighted = (n_left * variance(lsum, lsq, n_left)
                        + n_right * variance(rsum, rsq, n_right))
                        / n as f64;
                    consider(&mut best, weighted, feature, threshold);
                }
            }
        }
    }
    best.map(|(_, feature, threshold)| (feature, threshold))
}

fn consider(best: &mut Option<(f64, usize, f64)>, impurity: f64, feature: usize, threshold: f64) {
    // Strict improvement only: the first candidate scanned wins ties, and
    // candidates arrive in (feature, threshold) ascending order.
    match best {
        Some((current, _, _)) if impurity >= *current => {}
        _ => *best = Some((impurity, feature, threshold)),
    }
}

fn midpoint(a: f64, b: f64) -> f64 {
    a + (b - a) / 2.0
}

pub fn gini(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let total = total as f64;
    1.0 - counts
        .iter()
        .map(|&c| {
            let p = c as f64 / total;
            p * p
        })
        .sum::<f64>()
}

fn variance(sum: f64, sum_sq: f64, n: f64) -> f64 {
    if n == 0.0 {
        return 0.0;
    }
    let mean = sum / n;
    (sum_sq / n - mean * mean).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xor_is_shattered_at_depth_2() {
        let x = Matrix::from_rows(vec![
            vec![0.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
        ]);
        let y = vec![0, 1, 1, 0];
        let params = fit_tree_classifier(&x, &y, 2, 3);
        let preds = predict_tree(&params, &x);
        let got: Vec<usize> = preds.iter().map(|&p| p as usize).collect();
        assert_eq!(got, y);
        assert!(params.depth() <= 3);
    }

    #[test]
    fn depth_cap_is_respected() {
        let x = Matrix::from_rows((0..16).map(|i| vec![i as f64]).collect());
        let y: Vec<usize> = (0..16).map(|i| i % 2).collect();
        for cap in [1usize, 2, 3] {
            let params = fit_tree_classifier(&x, &y, 2, cap);
            assert!(params.depth() <= cap, "depth {} > cap {cap}", params.depth());
        }
    }

    #[test]
    fn pure_node_is_a_leaf() {
        let x = Matrix::from_rows(vec![vec![1.0], vec![2.0], vec![3.0]]);
        let params = fit_tree_classifier(&x, &[1, 1, 1], 2, 5);
        assert_eq!(params.nodes.len(), 1);
        assert_eq!(params.nodes[0].leaf_value, 1.0);
    }

    #[test]
    fn identical_features_make_a_leaf() {
        let x = Matrix::from_rows(vec![vec![2.0], vec![2.0], vec![2.0]]);
        let params = fit_tree_classifier(&x, &[0, 1, 0], 2, 5);
        assert_eq!(params.nodes.len(), 1);
        // Majority vote: class 0.
        assert_eq!(params.nodes[0].leaf_value, 0.0);
    }

    #[test]
    fn majority_tie_prefers_smaller_class() {
        let x = Matrix::from_rows(vec![vec![1.0], vec![1.0]]);
        let params = fit_tree_classifier(&x, &[1, 0], 2, 0);
        assert_eq!(params.nodes[0].leaf_value, 0.0);
    }

    #[test]
    fn regression_splits_reduce_variance() {
        let x = Matrix::from_rows(vec![
            vec![1.0], vec![2.0], vec![3.0], vec![10.0], vec![11.0], vec![12.0],
        ]);
        let y = vec![0.0, 0.1, -0.1, 5.0, 5.1, 4.9];
        let params = fit_tree_regressor(&x, &y, 3);
        let preds = predict_tree(&params, &x);
        for (p, t) in preds.iter().zip(&y) {
            assert!((p - t).abs() < 0.5, "pred {p} vs {t}");
        }
        // Root split lands between the clusters.
        let root = params.nodes[0];
        assert!(root.threshold > 3.0 && root.threshold < 10.0);
    }

    #[test]
    fn split_goes_left_on_equality() {
        let x = Matrix::from_rows(vec![vec![0.0], vec![1.0]]);
        let params = fit_tree_classifier(&x, &[0, 1], 2, 3);
        let root = params.nodes[0];
        assert_eq!(root.feature, 0);
        let preds = predict_tree(&params, &Matrix::from_rows(vec![vec![root.threshold]]));
        let left_leaf = params.nodes[root.left as usize];
        assert_eq!(preds[0], left_leaf.leaf_value);
    }

    #[test]
    fn deterministic_fit() {
        let x = Matrix::from_rows(vec![
            vec![1.0, 5.0], vec![2.0, 4.0], vec![3.0, 3.0], vec![4.0, 2.0], vec![5.0, 1.0],
        ]);
        let y = vec![0, 0, 1, 1, 1];
        let a = fit_tree_classifier(&x, &y, 2, 6);
        let b = fit_tree_classifier(&x, &y, 2, 6);
        assert_eq!(a, b);
    }
}
