//! Native model implementations and a config-driven fit/predict dispatch.

pub mod knn;
pub mod logistic;
pub mod ridge;
pub mod tree;

pub use knn::KnnParams;
pub use logistic::LogisticParams;
pub use ridge::RidgeParams;
pub use tree::{TreeNode, TreeParams};

use serde::{Deserialize, Serialize};

use crate::data::{Matrix, TargetValues, Task};

/// One model kind plus its hyperparameter assignment — a roster entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model_kind")]
pub enum ModelConfig {
    LogisticRegression { l2: f64 },
    DecisionTreeClassifier { max_depth: usize },
    KnnClassifier { k: usize },
    RidgeRegression { l2: f64 },
    DecisionTreeRegressor { max_depth: usize },
    KnnRegressor { k: usize },
}

impl ModelConfig {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ModelConfig::LogisticRegression { .. } => "LogisticRegression",
            ModelConfig::DecisionTreeClassifier { .. } => "DecisionTreeClassifier",
            ModelConfig::KnnClassifier { .. } => "KnnClassifier",
            ModelConfig::RidgeRegression { .. } => "RidgeRegression",
            ModelConfig::DecisionTreeRegressor { .. } => "DecisionTreeRegressor",
            ModelConfig::KnnRegressor { .. } => "KnnRegressor",
        }
    }

    /// Compact display form like `l2=0.1` or `max_depth=6`.
    pub fn hyperparams_label(&self) -> String {
        match self {
            ModelConfig::LogisticRegression { l2 } | ModelConfig::RidgeRegression { l2 } => {
                format!("l2={l2}")
            }
            ModelConfig::DecisionTreeClassifier { max_depth }
            | ModelConfig::DecisionTreeRegressor { max_depth } => format!("max_depth={max_depth}"),
            ModelConfig::KnnClassifier { k } | ModelConfig::KnnRegressor { k } => format!("k={k}"),
        }
    }

    pub fn hyperparams_json(&self) -> serde_json::Value {
        match self {
            ModelConfig::LogisticRegression { l2 } | ModelConfig::RidgeRegression { l2 } => {
                serde_json::json!({ "l2": l2 })
            }
            ModelConfig::DecisionTreeClassifier { max_depth }
            | ModelConfig::DecisionTreeRegressor { max_depth } => {
                serde_json::json!({ "max_depth": max_depth })
            }
            ModelConfig::KnnClassifier { k } | ModelConfig::KnnRegressor { k } => {
                serde_json::json!({ "k": k })
            }
        }
    }

    /// Rebuild a config from artifact fields.
    pub fn from_parts(kind: &str, hyperparams: &serde_json::Value) -> Result<ModelConfig, String> {
        let f = |key: &str| -> Result<f64, String> {
            hyperparams
                .get(key)
                .and_then(|v| v.as_f64())
                .ok_or_else(|| format!("missing hyperparameter '{key}' for {kind}"))
        };
        let u = |key: &str| -> Result<usize, String> {
            hyperparams
                .get(key)
                .and_then(|v| v.as_u64())
                .map(|v| v as usize)
                .ok_or_else(|| format!("missing hyperparameter '{key}' for {kind}"))
        };
        Ok(match kind {
            "LogisticRegression" => ModelConfig::LogisticRegression { l2: f("l2")? },
            "DecisionTreeClassifier" => ModelConfig::DecisionTreeClassifier { max_depth: u("max_depth")? },
            "KnnClassifier" => ModelConfig::KnnClassifier { k: u("k")? },
            "RidgeRegression" => ModelConfig::RidgeRegression { l2: f("l2")? },
            "DecisionTreeRegressor" => ModelConfig::DecisionTreeRegressor { max_depth: u("max_depth")? },
            "KnnRegressor" => ModelConfig::KnnRegressor { k: u("k")? },
            other => return Err(format!("unknown model kind '{other}'")),
        })
    }

    pub fn task(&self) -> Task {
        match self {
            ModelConfig::LogisticRegression { .. }
            | ModelConfig::DecisionTreeClassifier { .. }
            | ModelConfig::KnnClassifier { .. } => Task::Classification,
            ModelConfig::RidgeRegression { .. }
            | ModelConfig::DecisionTreeRegressor { .. }
            | ModelConfig::KnnRegressor { .. } => Task::Regression,
        }
    }
}

/// Learned parameters for any roster model; serializable into artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum ModelParams {
    Logistic(LogisticParams),
    Tree(TreeParams),
    Knn(KnnParams),
    Ridge(RidgeParams),
}

/// Fit a model. `_seed` is the per-candidate seed (run seed + candidate
/// index); every v1 kernel is deterministic and ignores it.
pub fn fit_model(
    config: &ModelConfig,
    x: &Matrix,
    y: &TargetValues,
    n_classes: usize,
    _seed: u64,
) -> Result<ModelParams, String> {
    match (config, y) {
        (ModelConfig::LogisticRegression { l2 }, TargetValues::Classes(y)) => {
            Ok(ModelParams::Logistic(logistic::fit_logistic(x, y, n_classes, *l2)))
        }
        (ModelConfig::DecisionTreeClassifier { max_depth }, TargetValues::Classes(y)) => {
            Ok(ModelParams::Tree(tree::fit_tree_classifier(x, y, n_classes, *max_depth)))
        }
        (ModelConfig::KnnClassifier { k }, TargetValues::Classes(y)) => {
            let y: Vec<f64> = y.iter().map(|&c| c as f64).collect();
            Ok(ModelParams::Knn(knn::fit_knn(x, y, *k)))
        }
        (ModelConfig::RidgeRegression { l2 }, TargetValues::Numeric(y)) => {
            Ok(ModelParams::Ridge(ridge::fit_ridge(x, y, *l2)?))
        }
        (ModelConfig::DecisionTreeRegressor { max_depth }, TargetValues::Numeric(y)) => {
            Ok(ModelParams::Tree(tree::fit_tree_regressor(x, y, *max_depth)))
        }
        (ModelConfig::KnnRegressor { k }, TargetValues::Numeric(y)) => {
            Ok(ModelParams::Knn(knn::fit_knn(x, y.clone(), *k)))
        }
        _ => Err(format!(
            "target kind does not match model '{}'",
            config.kind_name()
        )),
    }
}

pub fn predict_model(
    params: &ModelParams,
    task: Task,
    n_classes: usize,
    x: &Matrix,
) -> TargetValues {
    match (params, task) {
        (ModelParams::Logistic(p), _) => TargetValues::Classes(logistic::predict_logistic(p, x)),
        (ModelParams::Tree(p), Task::Classification) => {
            TargetValues::Classes(tree::predict_tree(p, x).into_iter().map(|v| v as usize).collect())
        }
        (ModelParams::Tree(p), Task::Regression) => TargetValues::Numeric(tree::predict_tree(p, x)),
        (ModelParams::Knn(p), Task::Classification) => {
            TargetValues::Classes(knn::predict_knn_classifier(p, x, n_classes))
        }
        (ModelParams::Knn(p), Task::Regression) => {
            TargetValues::Numeric(knn::predict_knn_regressor(p, x))
        }
        (ModelParams::Ridge(p), _) => TargetValues::Numeric(ridge::predict_ridge(p, x)),
    }
}
