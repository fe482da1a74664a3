//! Evaluation metrics. Classification: accuracy and macro-F1; regression:
//! rmse and r². Metric/task mismatches are errors surfaced before any
//! search work starts.

use serde::{Deserialize, Serialize};

use crate::data::{TargetValues, Task};

use super::AutomlError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Accuracy,
    F1,
    Rmse,
    R2,
}

impl Metric {
    pub fn name(&self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::F1 => "f1",
            Metric::Rmse => "rmse",
            Metric::R2 => "r2",
        }
    }

    pub fn higher_is_better(&self) -> bool {
        !matches!(self, Metric::Rmse)
    }

    pub fn valid_for(&self, task: Task) -> bool {
        match self {
            Metric::Accuracy | Metric::F1 => task == Task::Classification,
            Metric::Rmse | Metric::R2 => task == Task::Regression,
        }
    }

    /// Resolve an `evaluation` argument: "auto" picks accuracy for
    /// classification and rmse for regression.
    pub fn resolve(evaluation: &str, task: Task) -> Result<Metric, AutomlError> {
        let metric = match evaluation {
            "auto" => match task {
                Task::Classification => Metric::Accuracy,
                Task::Regression => Metric::Rmse,
            },
            "accuracy" => Metric::Accuracy,
            "f1" => Metric::F1,
            "rmse" => Metric::Rmse,
            "r2" => Metric::R2,
            other => {
                return Err(AutomlError::Metric(format!(
                    "unknown evaluation metric '{other}' (expected auto, accuracy, f1, rmse or r2)"
                )))
            }
        };
        if !metric.valid_for(task) {
            return Err(AutomlError::Metric(format!(
                "metric '{}' is not valid for {} tasks",
                metric.name(),
                task.name()
            )));
        }
        Ok(metric)
    }
}

pub fn accuracy(y_true: &[usize], y_pred: &[usize]) -> f64 {
    debug_assert_eq!(y_true.len(), y_pred.len());
    if y_true.is_empty() {
        return 0.0;
    }
    let correct = y_true.iter().zip(y_pred).filter(|(t, p)| t == p).count();
    correct as f64 / y_true.len() as f64
}

/// Unweighted mean of per-class F1 over every class observed in the truth
/// or the predictions; a class with no predictions scores 0 and no class
/// with instances is excluded.
pub fn macro_f1(y_true: &[usize], y_pred: &[usize]) -> f64 {
    debug_assert_eq!(y_true.len(), y_pred.len());
    let mut classes: Vec<usize> = y_true.iter().chain(y_pred).copied().collect();
    classes.sort_unstable();
    classes.dedup();
    if classes.is_empty() {
        return 0.0;
    }
    let mut total = 0.0;
    for &class in &classes {
        let tp = y_true
            .iter()
            .zip(y_pred)
            .filter(|(&t, &p)| t == class && p == class)
            .count() as f64;
        let fp = y_true
            .iter()
            .zip(y_pred)
            .filter(|(&t, &p)| t != class && p == class)
            .count() as f64;
        let fngt = y_true
            .iter()
            .zip(y_pred)
            .filter(|(&t, &p)| t == class && p != class)
            .count() as f64;
        let denom = 2.0 * tp + fp + fngt;
        total += if denom == 0.0 { 0.0 } else { 2.0 * tp / denom };
    }
    total / classes.len() as f64
}

pub fn rmse(y_true: &[f64], y_pred: &[f64]) -> f64 {
    debug_assert_eq!(y_true.len(), y_pred.len());
    if y_true.is_empty() {
        return 0.0;
    }
    let mse = y_true
        .iter()
        .zip(y_pred)
        .map(|(t, p)| (t - p) * (t - p))
        .sum::<f64>()
        / y_true.len() as f64;
    mse.sqrt()
}

/// 1 - SSres/SStot; defined as 0 when SStot is 0.
pub fn r2(y_true: &[f64], y_pred: &[f64]) -> f64 {
    debug_assert_eq!(y_true.len(), y_pred.len());
    if y_true.is_empty() {
        return 0.0;
    }
    let mean = y_true.iter().sum::<f64>() / y_true.len() as f64;
    let ss_tot: f64 = y_true.iter().map(|t| (t - mean) * (t - mean)).sum();
    if ss_tot == 0.0 {
        return 0.0;
    }
    let ss_res: f64 = y_true
        .iter()
        .zip(y_pred)
        .map(|(t, p)| (t - p) * (t - p))
        .sum();
    1.0 - ss_res / ss_tot
}

/// Score predictions against the truth under a metric; the value kinds
/// must match the metric's task.
pub fn score(metric: Metric, y_true: &TargetValues, y_pred: &TargetValues) -> Result<f64, AutomlError> {
    match (metric, y_true, y_pred) {
        (Metric::Accuracy, TargetValues::Classes(t), TargetValues::Classes(p)) => {
            Ok(accuracy(t, p))
        }
        (Metric::F1, TargetValues::Classes(t), TargetValues::Classes(p)) => Ok(macro_f1(t, p)),
        (Metric::Rmse, TargetValues::Numeric(t), TargetValues::Numeric(p)) => Ok(rmse(t, p)),
        (Metric::R2, TargetValues::Numeric(t), TargetValues::Numeric(p)) => Ok(r2(t, p)),
        _ => Err(AutomlError::Metric(format!(
            "metric '{}' does not apply to these values",
            metric.name()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accuracy_examples() {
        assert_eq!(accuracy(&[1, 0, 1, 1], &[1, 0, 0, 1]), 0.75);
        assert_eq!(accuracy(&[1, 1], &[1, 1]), 1.0);
    }

    #[test]
    fn rmse_of_exact_predictions_is_zero() {
        let y = [1.5, -2.0, 3.25];
        assert_eq!(rmse(&y, &y), 0.0);
    }

    #[test]
    fn r2_of_mean_prediction_is_zero() {
        let y = [1.0, 2.0, 3.0, 6.0];
        let mean = y.iter().sum::<f64>() / 4.0;
        let preds = [mean; 4];
        assert!(r2(&y, &preds).abs() < 1e-12);
    }

    #[test]
    fn r2_with_constant_truth_is_defined_as_zero() {
        assert_eq!(r2(&[2.0, 2.0], &[1.0, 3.0]), 0.0);
    }

    #[test]
    fn macro_f1_perfect_is_one() {
        assert_eq!(macro_f1(&[0, 1, 2, 1], &[0, 1, 2, 1]), 1.0);
    }

    #[test]
    fn macro_f1_counts_unpredicted_classes_as_zero() {
        // Class 2 never predicted: F1 components 1, 1, 0 -> 2/3.
        let t = [0, 1, 2];
        let p = [0, 1, 1];
        let got = macro_f1(&t, &p);
        let f1_0 = 1.0;
        let f1_1 = 2.0 * 1.0 / (2.0 * 1.0 + 1.0 + 0.0);
        let expect = (f1_0 + f1_1 + 0.0) / 3.0;
        assert!((got - expect).abs() < 1e-12);
    }

    #[test]
    fn metric_resolution_and_task_validity() {
        assert_eq!(Metric::resolve("auto", Task::Classification).unwrap(), Metric::Accuracy);
        assert_eq!(Metric::resolve("auto", Task::Regression).unwrap(), Metric::Rmse);
        assert!(Metric::resolve("rmse", Task::Classification).is_err());
        assert!(Metric::resolve("f1", Task::Regression).is_err());
        assert!(Metric::resolve("made_up", Task::Regression).is_err());
    }

    #[test]
    fn score_rejects_value_kind_mismatch() {
        let classes = TargetValues::Classes(vec![0, 1]);
        let numbers = TargetValues::Numeric(vec![0.0, 1.0]);
        assert!(score(Metric::Accuracy, &classes, &classes).is_ok());
        assert!(score(Metric::Accuracy, &numbers, &numbers).is_err());
        assert!(score(Metric::Rmse, &classes, &classes).is_err());
    }

    #[test]
    fn metric_bounds_on_random_vectors() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            let n = rng.gen_range(1..40);
            let t: Vec<usize> = (0..n).map(|_| rng.gen_range(0..4)).collect();
            let p: Vec<usize> = (0..n).map(|_| rng.gen_range(0..4)).collect();
            let acc = accuracy(&t, &p);
            assert!((0.0..=1.0).contains(&acc));
            let f1 = macro_f1(&t, &p);
            assert!((0.0..=1.0).contains(&f1), "f1 {f1}");
            let ty: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let py: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
            assert!(rmse(&ty, &py) >= 0.0);
            assert!(r2(&ty, &py) <= 1.0 + 1e-12);
        }
    }
}
