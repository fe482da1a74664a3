//! The model-search core: a fixed, versioned candidate roster scored by
//! cross-validation on a worker pool, deterministic winner selection, and
//! report construction.
//!
//! Determinism contract: with an unlimited time budget, the same dataset,
//! parameters and seed produce the same report and the same selected
//! candidate at any thread count. Workers claim candidates in index order
//! from a shared cursor and results reduce by index, never by arrival.

mod cv;
mod metrics;
mod models;
mod report;

pub use cv::{build_fold, cross_validate, FoldCache, FoldData, SchemaProtocol};
pub use metrics::{accuracy, macro_f1, r2, rmse, score, Metric};
pub use models::{
    fit_model, predict_model, KnnParams, LogisticParams, ModelConfig, ModelParams, RidgeParams,
    TreeNode, TreeParams,
};
pub use report::{render_report, report_json};

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::data::{
    apply_schema, clean, fit_schema, kfold, ColumnType, DataError, Dataset, FeatureSchema,
    Preprocess, TargetValues, Task,
};

/// Version of the fixed candidate roster; recorded in reports and artifacts.
pub const ROSTER_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum AutomlError {
    #[error("{0}")]
    Data(#[from] DataError),
    #[error("metric error: {0}")]
    Metric(String),
    #[error("fit error: {0}")]
    Fit(String),
    #[error("deadline error: {0}")]
    Deadline(String),
    #[error("invalid argument: {0}")]
    InvalidArg(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    /// Position in the fixed enumeration order.
    pub index: usize,
    pub config: ModelConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CandidateStatus {
    Done,
    SkippedDeadline,
    Failed(String),
}

impl CandidateStatus {
    pub fn label(&self) -> &'static str {
        match self {
            CandidateStatus::Done => "done",
            CandidateStatus::SkippedDeadline => "skipped_deadline",
            CandidateStatus::Failed(_) => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateResult {
    pub candidate: Candidate,
    /// One score per fold when done; empty otherwise.
    pub fold_scores: Vec<f64>,
    pub mean_score: Option<f64>,
    pub std_score: Option<f64>,
    pub fit_seconds: f64,
    pub status: CandidateStatus,
}

/// Search outcome: every candidate's result in index order plus run
/// metadata. The data model keeps index order; the printed view ranks by
/// score.
#[derive(Debug, Clone)]
pub struct Report {
    pub task: Task,
    pub metric: Metric,
    pub rows: Vec<CandidateResult>,
    /// Candidate index of the winner; always a done row.
    pub best_index: usize,
    pub dataset_rows: usize,
    pub dataset_features: usize,
    pub folds: usize,
    pub seed: u64,
    pub threads: usize,
    pub roster_version: u32,
    pub total_wall_seconds: f64,
    /// Stratification fell back to plain folds (singleton class).
    pub stratification_warning: bool,
}

impl Report {
    pub fn best_row(&self) -> &CandidateResult {
        self.rows
            .iter()
            .find(|r| r.candidate.index == self.best_index)
            .expect("best_index refers to a row")
    }

    /// One-line summary used by `print`.
    pub fn summary(&self) -> String {
        format!(
            "Report({} candidates, best index {}, {} {})",
            self.rows.len(),
            self.best_index,
            self.metric.name(),
            self.best_row()
                .mean_score
                .map(|m| format!("{m:.4}"))
                .unwrap_or_else(|| "-".to_string()),
        )
    }
}

/// The refit-on-all-rows winner, ready to deploy. Self-contained: carries
/// the fitted schema and learned parameters.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub schema: FeatureSchema,
    pub config: ModelConfig,
    pub params: ModelParams,
    pub task: Task,
    pub metric: Metric,
    pub cv_score: f64,
    pub seed: u64,
    pub roster_version: u32,
}

impl TrainedModel {
    pub fn n_classes(&self) -> usize {
        self.schema.classes().map(|c| c.len()).unwrap_or(0)
    }

    /// Apply the stored schema and predict. The target column may be
    /// absent from `dataset`; extra columns are ignored.
    pub fn predict(&self, dataset: &Dataset) -> Result<TargetValues, AutomlError> {
        let (x, _) = apply_schema(&self.schema, dataset)?;
        Ok(predict_model(&self.params, self.task, self.n_classes(), &x))
    }

    /// Predictions as text: class labels for classification, shortest
    /// round-trip numbers for regression.
    pub fn prediction_labels(&self, preds: &TargetValues) -> Vec<String> {
        match preds {
            TargetValues::Classes(idx) => {
                let classes = self.schema.classes().expect("classification model");
                idx.iter().map(|&i| classes[i].clone()).collect()
            }
            TargetValues::Numeric(values) => {
                values.iter().map(|&v| crate::data::format_number(v)).collect()
            }
        }
    }

    pub fn summary(&self) -> String {
        format!("Model({}, {})", self.config.kind_name(), self.config.hyperparams_label())
    }
}

/// Infer the task from the target column: categorical or boolean targets —
/// and numeric ones with at most 10 distinct values — classify; anything
/// else regresses.
pub fn infer_task(dataset: &Dataset, target: &str) -> Result<Task, AutomlError> {
    let col = dataset
        .column(target)
        .ok_or_else(|| DataError::Schema(format!("unknown target column '{target}'")))?;
    Ok(match col.ctype() {
        ColumnType::Categorical | ColumnType::Boolean => Task::Classification,
        ColumnType::Numeric => {
            if col.distinct_values().len() <= 10 {
                Task::Classification
            } else {
                Task::Regression
            }
        }
    })
}

/// The fixed 7-candidate roster per task, in versioned order.
pub fn enumerate_candidates(task: Task) -> Vec<Candidate> {
    let configs: Vec<ModelConfig> = match task {
        Task::Classification => vec![
            ModelConfig::LogisticRegression { l2: 0.0 },
            ModelConfig::LogisticRegression { l2: 0.1 },
            ModelConfig::DecisionTreeClassifier { max_depth: 3 },
            ModelConfig::DecisionTreeClassifier { max_depth: 6 },
            ModelConfig::DecisionTreeClassifier { max_depth: 10 },
            ModelConfig::KnnClassifier { k: 3 },
            ModelConfig::KnnClassifier { k: 7 },
        ],
        Task::Regression => vec![
            ModelConfig::RidgeRegression { l2: 0.0 },
            ModelConfig::RidgeRegression { l2: 0.1 },
            ModelConfig::DecisionTreeRegressor { max_depth: 3 },
            ModelConfig::DecisionTreeRegressor { max_depth: 6 },
            ModelConfig::DecisionTreeRegressor { max_depth: 10 },
            ModelConfig::KnnRegressor { k: 3 },
            ModelConfig::KnnRegressor { k: 7 },
        ],
    };
    configs
        .into_iter()
        .enumerate()
        .map(|(index, config)| Candidate { index, config })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub target: String,
    /// None = infer from the target column.
    pub task: Option<Task>,
    pub preprocess: Preprocess,
    /// Soft deadline in seconds, checked when a candidate starts; 0 or
    /// less means unlimited. Running fits are never killed.
    pub max_time_seconds: f64,
    /// None = accuracy for classification, rmse for regression.
    pub evaluation: Option<Metric>,
    pub folds: usize,
    pub seed: u64,
    pub threads: usize,
}

/// Run the full search over the standard roster.
pub fn search(dataset: &Dataset, config: &SearchConfig) -> Result<(TrainedModel, Report), AutomlError> {
    let task = match config.task {
        Some(task) => task,
        None => {
            let cleaned = clean(dataset)?;
            infer_task(&cleaned, &config.target)?
        }
    };
    search_with_candidates(dataset, config, enumerate_candidates(task), None)
}

/// Search over an explicit candidate list (the standard roster, or an
/// inflated one for scaling benchmarks). `fit_padding` artificially
/// lengthens every fit.
pub fn search_with_candidates(
    dataset: &Dataset,
    config: &SearchConfig,
    candidates: Vec<Candidate>,
    fit_padding: Option<Duration>,
) -> Result<(TrainedModel, Report), AutomlError> {
    let started = Instant::now();
    let cleaned = clean(dataset)?;
    let target_col = cleaned.column(&config.target).ok_or_else(|| {
        DataError::Schema(format!(
            "unknown target column '{}' (it may have been dropped by cleaning)",
            config.target
        ))
    })?;
    let task = match config.task {
        Some(task) => task,
        None => infer_task(&cleaned, &config.target)?,
    };
    let metric = match config.evaluation {
        Some(metric) => {
            if !metric.valid_for(task) {
                return Err(AutomlError::Metric(format!(
                    "metric '{}' is not valid for {} tasks",
                    metric.name(),
                    task.name()
                )));
            }
            metric
        }
        None => Metric::resolve("auto", task)?,
    };

    // Stratify classification folds on raw target values; fold construction
    // uses the run-level seed so every candidate sees identical folds.
    let labels: Option<Vec<usize>> = match task {
        Task::Classification => {
            let distinct = target_col.distinct_values();
            Some(
                (0..cleaned.n_rows)
                    .map(|row| {
                        let value = target_col.cell_string(row).unwrap_or_default();
                        distinct.iter().position(|v| *v == value).unwrap_or(0)
                    })
                    .collect(),
            )
        }
        Task::Regression => None,
    };
    let plan = kfold(cleaned.n_rows, config.folds, labels.as_deref(), config.seed)?;

    let protocol = SchemaProtocol {
        target: config.target.clone(),
        preprocess: config.preprocess,
        task,
    };
    let fingerprint = {
        let mut hasher = DefaultHasher::new();
        protocol.target.hash(&mut hasher);
        (protocol.preprocess == Preprocess::Standard).hash(&mut hasher);
        (task == Task::Classification).hash(&mut hasher);
        config.seed.hash(&mut hasher);
        hasher.finish()
    };

    let cache = FoldCache::new();
    let cursor = AtomicUsize::new(0);
    let n_candidates = candidates.len();
    let threads = config.threads.max(1);
    let (tx, rx) = mpsc::channel::<(usize, CandidateResult)>();

    std::thread::scope(|scope| {
        for _ in 0..threads.min(n_candidates.max(1)) {
            let tx = tx.clone();
            let candidates = &candidates;
            let cleaned = &cleaned;
            let protocol = &protocol;
            let plan = &plan;
            let cache = &cache;
            let cursor = &cursor;
            scope.spawn(move || {
                loop {
                    // Claim strictly in index order from the shared cursor.
                    let index = cursor.fetch_add(1, Ordering::SeqCst);
                    if index >= n_candidates {
                        break;
                    }
                    let candidate = candidates[index].clone();
                    let deadline_hit = config.max_time_seconds > 0.0
                        && started.elapsed().as_secs_f64() >= config.max_time_seconds;
                    let result = if deadline_hit {
                        CandidateResult {
                            candidate,
                            fold_scores: Vec::new(),
                            mean_score: None,
                            std_score: None,
                            fit_seconds: 0.0,
                            status: CandidateStatus::SkippedDeadline,
                        }
                    } else {
                        cross_validate(
                            candidate,
                            cleaned,
                            protocol,
                            plan,
                            cache,
                            fingerprint,
                            metric,
                            config.seed,
                            fit_padding,
                        )
                    };
                    if tx.send((index, result)).is_err() {
                        break;
                    }
                }
            });
        }
        drop(tx);
    });

    // Reduce by candidate index, never by arrival order.
    let mut slots: Vec<Option<CandidateResult>> = (0..n_candidates).map(|_| None).collect();
    for (index, result) in rx {
        slots[index] = Some(result);
    }
    let rows: Vec<CandidateResult> = slots
        .into_iter()
        .map(|slot| slot.expect("every claimed candidate reports"))
        .collect();

    let best_position = pick_best(&rows, metric).ok_or_else(|| no_winner_error(&rows))?;

    // Final model: refit schema and winner on all rows.
    let schema = fit_schema(&cleaned, &config.target, config.preprocess, task)?;
    let (x, y) = apply_schema(&schema, &cleaned)?;
    let y = y.expect("target present on cleaned data");
    let n_classes = schema.classes().map(|c| c.len()).unwrap_or(0);
    let winner = rows[best_position].candidate.clone();
    let params = fit_model(
        &winner.config,
        &x,
        &y,
        n_classes,
        config.seed.wrapping_add(winner.index as u64),
    )
    .map_err(AutomlError::Fit)?;
    let cv_score = rows[best_position].mean_score.expect("winner is done");

    let report = Report {
        task,
        metric,
        dataset_rows: cleaned.n_rows,
        dataset_features: schema.n_features(),
        folds: plan.folds.len(),
        seed: config.seed,
        threads,
        roster_version: ROSTER_VERSION,
        total_wall_seconds: started.elapsed().as_secs_f64(),
        stratification_warning: plan.degenerate_warning,
        best_index: winner.index,
        rows,
    };
    let model = TrainedModel {
        schema,
        config: winner.config,
        params,
        task,
        metric,
        cv_score,
        seed: config.seed,
        roster_version: ROSTER_VERSION,
    };
    Ok((model, report))
}

/// Deterministic winner: best mean score among done rows (max for
/// accuracy/f1/r2, min for rmse); ties keep the lower candidate index.
/// Returns a position in `rows`.
pub fn pick_best(rows: &[CandidateResult], metric: Metric) -> Option<usize> {
    let mut ordered: Vec<usize> = (0..rows.len()).collect();
    ordered.sort_by_key(|&p| rows[p].candidate.index);
    let mut best: Option<(usize, f64)> = None;
    for position in ordered {
        let row = &rows[position];
        let (CandidateStatus::Done, Some(mean)) = (&row.status, row.mean_score) else {
            continue;
        };
        let improves = match best {
            None => true,
            Some((_, best_mean)) => {
                if metric.higher_is_better() {
                    mean > best_mean
                } else {
                    mean < best_mean
                }
            }
        };
        if improves {
            best = Some((position, mean));
        }
    }
    best.map(|(position, _)| position)
}

fn no_winner_error(rows: &[CandidateResult]) -> AutomlError {
    if rows
        .iter()
        .any(|r| matches!(r.status, CandidateStatus::SkippedDeadline))
    {
        AutomlError::Deadline("max_time expired before any candidate completed".to_string())
    } else {
        let first_failure = rows
            .iter()
            .find_map(|r| match &r.status {
                CandidateStatus::Failed(msg) => Some(msg.clone()),
                _ => None,
            })
            .unwrap_or_else(|| "no candidates were evaluated".to_string());
        AutomlError::Fit(format!("every candidate failed; first failure: {first_failure}"))
    }
}
