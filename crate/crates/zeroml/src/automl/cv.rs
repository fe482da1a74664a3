//! Cross-validated scoring of one candidate.
//!
//! The schema is re-fit on each training fold — never on the full data —
//! so held-out rows cannot leak statistics into preprocessing. Fold
//! matrices depend only on (schema protocol, fold), not on the candidate,
//! so they are memoized in a concurrent map shared read-only across search
//! workers; racing builders produce identical values, making last-write-
//! wins benign.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use crate::data::{
    apply_schema, fit_schema, select_rows, Dataset, FeatureSchema, FoldPlan, Matrix, Preprocess,
    TargetValues, Task,
};

use super::metrics::{score, Metric};
use super::models::fit_model;
use super::models::predict_model;
use super::{Candidate, CandidateResult, CandidateStatus};

/// Everything that determines how features and targets are derived.
#[derive(Debug, Clone)]
pub struct SchemaProtocol {
    pub target: String,
    pub preprocess: Preprocess,
    pub task: Task,
}

#[derive(Debug)]
pub struct FoldData {
    pub schema: FeatureSchema,
    pub train_x: Matrix,
    pub train_y: TargetValues,
    pub test_x: Matrix,
    pub test_y: TargetValues,
}

/// Memoized (schema fingerprint, fold id) -> transformed fold matrices.
#[derive(Default)]
pub struct FoldCache {
    entries: Mutex<HashMap<(u64, usize), Arc<FoldData>>>,
}

impl FoldCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get_or_build(
        &self,
        fingerprint: u64,
        fold: usize,
        build: impl FnOnce() -> Result<FoldData, super::AutomlError>,
    ) -> Result<Arc<FoldData>, super::AutomlError> {
        if let Some(hit) = self.entries.lock().expect("cache lock").get(&(fingerprint, fold)) {
            return Ok(Arc::clone(hit));
        }
        // Built outside the lock; a concurrent duplicate build yields the
        // same deterministic value.
        let data = Arc::new(build()?);
        self.entries
            .lock()
            .expect("cache lock")
            .insert((fingerprint, fold), Arc::clone(&data));
        Ok(data)
    }

    #[cfg(test)]
    pub fn len(&self) -> usize {
        self.entries.lock().unwrap().len()
    }
}

/// Fit the fold's schema on its training rows only and transform both
/// partitions.
pub fn build_fold(
    dataset: &Dataset,
    protocol: &SchemaProtocol,
    plan: &FoldPlan,
    fold: usize,
) -> Result<FoldData, super::AutomlError> {
    let train_rows = plan.train_rows(fold);
    let train = select_rows(dataset, &train_rows);
    let test = select_rows(dataset, &plan.folds[fold]);
    let schema = fit_schema(&train, &protocol.target, protocol.preprocess, protocol.task)?;
    let (train_x, train_y) = apply_schema(&schema, &train)?;
    let (test_x, test_y) = apply_schema(&schema, &test)?;
    let (train_y, test_y) = match (train_y, test_y) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(super::AutomlError::Data(crate::data::DataError::Schema(
                format!("target column '{}' missing from fold data", protocol.target),
            )))
        }
    };
    Ok(FoldData { schema, train_x, train_y, test_x, test_y })
}

/// Cross-validate one candidate over the shared folds. Failures are
/// captured in the result status; this never aborts the surrounding
/// search. `fit_padding` artificially lengthens each fit (used by the
/// parallel-scaling benchmark).
#[allow(clippy::too_many_arguments)]
pub fn cross_validate(
    candidate: Candidate,
    dataset: &Dataset,
    protocol: &SchemaProtocol,
    plan: &FoldPlan,
    cache: &FoldCache,
    fingerprint: u64,
    metric: Metric,
    run_seed: u64,
    fit_padding: Option<Duration>,
) -> CandidateResult {
    let candidate_seed = run_seed.wrapping_add(candidate.index as u64);
    let started = Instant::now();
    let mut fold_scores = Vec::with_capacity(plan.folds.len());

    for fold in 0..plan.folds.len() {
        let data = match cache.get_or_build(fingerprint, fold, || {
            build_fold(dataset, protocol, plan, fold)
        }) {
            Ok(data) => data,
            Err(e) => return failed(candidate, started, e.to_string()),
        };
        let n_classes = data.schema.classes().map(|c| c.len()).unwrap_or(0);
        let params = match fit_model(
            &candidate.config,
            &data.train_x,
            &data.train_y,
            n_classes,
            candidate_seed,
        ) {
            Ok(params) => params,
            Err(msg) => return failed(candidate, started, msg),
        };
        if let Some(pad) = fit_padding {
            std::thread::sleep(pad);
        }
        let preds = predict_model(&params, protocol.task, n_classes, &data.test_x);
        match score(metric, &data.test_y, &preds) {
            Ok(s) => fold_scores.push(s),
            Err(e) => return failed(candidate, started, e.to_string()),
        }
    }

    let n = fold_scores.len() as f64;
    let mean = fold_scores.iter().sum::<f64>() / n;
    let var = fold_scores.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / n;
    CandidateResult {
        candidate,
        fold_scores,
        mean_score: Some(mean),
        std_score: Some(var.sqrt()),
        fit_seconds: started.elapsed().as_secs_f64(),
        status: CandidateStatus::Done,
    }
}

fn failed(candidate: Candidate, started: Instant, message: String) -> CandidateResult {
    CandidateResult {
        candidate,
        fold_scores: Vec::new(),
        mean_score: None,
        std_score: None,
        fit_seconds: started.elapsed().as_secs_f64(),
        status: CandidateStatus::Failed(message),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{kfold, Column, ColumnData};

    fn numeric_dataset(xs: &[f64], ys: &[f64]) -> Dataset {
        Dataset::new(
            vec![
                Column {
                    name: "x".into(),
                    data: ColumnData::Numeric(xs.to_vec()),
                    missing: vec![false; xs.len()],
                },
                Column {
                    name: "y".into(),
                    data: ColumnData::Numeric(ys.to_vec()),
                    missing: vec![false; ys.len()],
                },
            ],
            xs.len(),
        )
    }

    fn protocol() -> SchemaProtocol {
        SchemaProtocol {
            target: "y".into(),
            preprocess: Preprocess::Standard,
            task: Task::Regression,
        }
    }

    #[test]
    fn fold_schema_is_fit_on_training_rows_only() {
        // Perturbing a held-out row must not change that fold's schema.
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x).collect();
        let d1 = numeric_dataset(&xs, &ys);
        let plan = kfold(10, 5, None, 3).unwrap();
        let fold = 2usize;
        let mut xs2 = xs.clone();
        let held_out = plan.folds[fold][0];
        xs2[held_out] += 1000.0;
        let d2 = numeric_dataset(&xs2, &ys);
        let f1 = build_fold(&d1, &protocol(), &plan, fold).unwrap();
        let f2 = build_fold(&d2, &protocol(), &plan, fold).unwrap();
        assert_eq!(f1.schema, f2.schema);
        // And perturbing a training row must change it.
        let mut xs3 = xs.clone();
        let train_row = plan.train_rows(fold)[0];
        xs3[train_row] += 1000.0;
        let d3 = numeric_dataset(&xs3, &ys);
        let f3 = build_fold(&d3, &protocol(), &plan, fold).unwrap();
        assert_ne!(f1.schema, f3.schema);
    }

    #[test]
    fn cache_shares_folds_across_candidates() {
        let xs: Vec<f64> = (0..12).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x + 1.0).collect();
        let d = numeric_dataset(&xs, &ys);
        let plan = kfold(12, 3, None, 1).unwrap();
        let cache = FoldCache::new();
        for index in 0..2 {
            let candidate = Candidate {
                index,
                config: crate::automl::ModelConfig::RidgeRegression { l2: 0.0 },
            };
            let result = cross_validate(
                candidate, &d, &protocol(), &plan, &cache, 7, Metric::Rmse, 42, None,
            );
            assert!(matches!(result.status, CandidateStatus::Done));
        }
        assert_eq!(cache.len(), 3); // one entry per fold, reused by both candidates
    }

    #[test]
    fn failures_are_captured_not_propagated() {
        // Duplicate passthrough features with l2=0 make ridge singular.
        let d = Dataset::new(
            vec![
                Column {
                    name: "a".into(),
                    data: ColumnData::Numeric(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]),
                    missing: vec![false; 6],
                },
                Column {
                    name: "b".into(),
                    data: ColumnData::Numeric(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]),
                    missing: vec![false; 6],
                },
                Column {
                    name: "y".into(),
                    data: ColumnData::Numeric(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]),
                    missing: vec![false; 6],
                },
            ],
            6,
        );
        let plan = kfold(6, 2, None, 0).unwrap();
        let cache = FoldCache::new();
        let proto = SchemaProtocol {
            target: "y".into(),
            preprocess: Preprocess::None,
            task: Task::Regression,
        };
        let result = cross_validate(
            Candidate { index: 0, config: crate::automl::ModelConfig::RidgeRegression { l2: 0.0 } },
            &d, &proto, &plan, &cache, 1, Metric::Rmse, 0, None,
        );
        assert!(matches!(result.status, CandidateStatus::Failed(_)));
        assert!(result.mean_score.is_none());
    }

    #[test]
    fn fold_scores_length_matches_folds_and_results_are_deterministic() {
        let xs: Vec<f64> = (0..20).map(|i| (i as f64) * 0.5).collect();
        let ys: Vec<f64> = xs.iter().map(|x| x * x).collect();
        let d = numeric_dataset(&xs, &ys);
        let plan = kfold(20, 5, None, 9).unwrap();
        let run = || {
            cross_validate(
                Candidate {
                    index: 3,
                    config: crate::automl::ModelConfig::KnnRegressor { k: 3 },
                },
                &d, &protocol(), &plan, &FoldCache::new(), 2, Metric::Rmse, 11, None,
            )
        };
        let a = run();
        let b = run();
        assert_eq!(a.fold_scores.len(), 5);
        assert_eq!(a.fold_scores, b.fold_scores);
        assert_eq!(a.mean_score, b.mean_score);
        assert_eq!(a.std_score, b.std_score);
    }
}
