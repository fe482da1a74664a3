//! The versioned model artifact: a single JSON document carrying the full
//! feature schema (training-time means, stds and category lists) and the
//! learned parameters. Loading reconstructs a model whose predictions are
//! bit-identical to the one that was saved — no statistic is ever
//! recomputed.

use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::automl::{Metric, ModelConfig, ModelParams, TrainedModel};
use crate::data::{FeatureSchema, Task};

use super::DeployError;

pub const ARTIFACT_FORMAT_VERSION: u32 = 1;

/// Overrides `created_at` with a fixed unix timestamp for reproducible
/// artifact bytes.
pub const TEST_EPOCH_ENV: &str = "ZEROML_TEST_EPOCH";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub format_version: u32,
    pub task: Task,
    pub metric: Metric,
    pub cv_score: f64,
    pub roster_version: u32,
    pub seed: u64,
    /// UTC ISO-8601, second precision.
    pub created_at: String,
    pub feature_schema: FeatureSchema,
    pub model_kind: String,
    pub hyperparams: serde_json::Value,
    pub parameters: ModelParams,
}

fn created_at() -> String {
    let now = match std::env::var(TEST_EPOCH_ENV)
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| DateTime::<Utc>::from_timestamp(secs, 0))
    {
        Some(fixed) => fixed,
        None => Utc::now(),
    };
    now.to_rfc3339_opts(SecondsFormat::Secs, true)
}

pub fn artifact_from_model(model: &TrainedModel) -> ModelArtifact {
    ModelArtifact {
        format_version: ARTIFACT_FORMAT_VERSION,
        task: model.task,
        metric: model.metric,
        cv_score: model.cv_score,
        roster_version: model.roster_version,
        seed: model.seed,
        created_at: created_at(),
        feature_schema: model.schema.clone(),
        model_kind: model.config.kind_name().to_string(),
        hyperparams: model.config.hyperparams_json(),
        parameters: model.params.clone(),
    }
}

/// Write the artifact as pretty-printed JSON with stable key order and
/// round-trip float precision.
pub fn save_artifact(model: &TrainedModel, path: &Path) -> Result<(), DeployError> {
    let artifact = artifact_from_model(model);
    let text = serde_json::to_string_pretty(&artifact).expect("artifact serializes");
    std::fs::write(path, text + "\n").map_err(|e| {
        DeployError::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {}", path.display(), e),
        ))
    })?;
    Ok(())
}

pub fn load_artifact(path: &Path) -> Result<(TrainedModel, ModelArtifact), DeployError> {
    let content = std::fs::read_to_string(path).map_err(|e| {
        DeployError::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {}", path.display(), e),
        ))
    })?;
    let artifact: ModelArtifact = serde_json::from_str(&content).map_err(|e| DeployError::Format {
        message: e.to_string(),
        offset: byte_offset(&content, e.line(), e.column()),
    })?;
    if artifact.format_version != ARTIFACT_FORMAT_VERSION {
        return Err(DeployError::Format {
            message: format!(
                "unsupported format_version {} (this build reads version {})",
                artifact.format_version, ARTIFACT_FORMAT_VERSION
            ),
            offset: 0,
        });
    }
    let config = ModelConfig::from_parts(&artifact.model_kind, &artifact.hyperparams)
        .map_err(|message| DeployError::Format { message, offset: 0 })?;
    if !params_match(&config, &artifact.parameters) {
        return Err(DeployError::Format {
            message: format!(
                "parameters do not match model_kind '{}'",
                artifact.model_kind
            ),
            offset: 0,
        });
    }
    let model = TrainedModel {
        schema: artifact.feature_schema.clone(),
        config,
        params: artifact.parameters.clone(),
        task: artifact.task,
        metric: artifact.metric,
        cv_score: artifact.cv_score,
        seed: artifact.seed,
        roster_version: artifact.roster_version,
    };
    Ok((model, artifact))
}

fn params_match(config: &ModelConfig, params: &ModelParams) -> bool {
    matches!(
        (config, params),
        (ModelConfig::LogisticRegression { .. }, ModelParams::Logistic(_))
            | (ModelConfig::DecisionTreeClassifier { .. }, ModelParams::Tree(_))
            | (ModelConfig::DecisionTreeRegressor { .. }, ModelParams::Tree(_))
            | (ModelConfig::KnnClassifier { .. }, ModelParams::Knn(_))
            | (ModelConfig::KnnRegressor { .. }, ModelParams::Knn(_))
            | (ModelConfig::RidgeRegression { .. }, ModelParams::Ridge(_))
    )
}

/// Translate serde's 1-based line/column into a byte offset.
fn byte_offset(content: &str, line: usize, column: usize) -> usize {
    let mut offset = 0usize;
    for (i, l) in content.lines().enumerate() {
        if i + 1 == line {
            return offset + column.saturating_sub(1);
        }
        offset += l.len() + 1;
    }
    content.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automl::{LogisticParams, RidgeParams};
    use crate::data::{ColumnTransform, TargetKind};

    fn sample_model() -> TrainedModel {
        TrainedModel {
            schema: FeatureSchema {
                input_columns: vec!["x1".into(), "x2".into()],
                transforms: vec![
                    ColumnTransform::Standardize { mean: 1.5, std: 0.25 },
                    ColumnTransform::Passthrough,
                ],
                target_name: "y".into(),
                target_kind: TargetKind::Classes { classes: vec!["a".into(), "b".into()] },
            },
            config: ModelConfig::LogisticRegression { l2: 0.1 },
            params: ModelParams::Logistic(LogisticParams {
                n_classes: 2,
                weights: vec![vec![0.5, -0.25, 0.125]],
            }),
            task: Task::Classification,
            metric: Metric::Accuracy,
            cv_score: 0.9625,
            seed: 42,
            roster_version: 1,
        }
    }

    #[test]
    fn save_load_round_trip_preserves_everything() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.zmodel");
        let model = sample_model();
        save_artifact(&model, &path).unwrap();
        let (loaded, artifact) = load_artifact(&path).unwrap();
        assert_eq!(artifact.format_version, 1);
        assert_eq!(loaded.schema, model.schema);
        assert_eq!(loaded.params, model.params);
        assert_eq!(loaded.config, model.config);
        assert_eq!(loaded.cv_score, model.cv_score);
    }

    #[test]
    fn fixed_epoch_makes_bytes_reproducible() {
        // Serializes access to the process-wide env var.
        static ENV_LOCK: std::sync::Mutex<()> = std::sync::Mutex::new(());
        let _guard = ENV_LOCK.lock().unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (p1, p2) = (dir.path().join("a.zmodel"), dir.path().join("b.zmodel"));
        std::env::set_var(TEST_EPOCH_ENV, "0");
        save_artifact(&sample_model(), &p1).unwrap();
        save_artifact(&sample_model(), &p2).unwrap();
        std::env::remove_var(TEST_EPOCH_ENV);
        let (a, b) = (std::fs::read(&p1).unwrap(), std::fs::read(&p2).unwrap());
        assert_eq!(a, b);
        assert!(String::from_utf8(a).unwrap().contains("1970-01-01T00:00:00Z"));
    }

    #[test]
    fn unknown_format_version_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.zmodel");
        save_artifact(&sample_model(), &path).unwrap();
        let content = std::fs::read_to_string(&path)
            .unwrap()
            .replace("\"format_version\": 1", "\"format_version\": 2");
        std::fs::write(&path, content).unwrap();
        match load_artifact(&path) {
            Err(DeployError::Format { message, .. }) => {
                assert!(message.contains("format_version 2"));
            }
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn truncated_file_reports_byte_offset() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.zmodel");
        save_artifact(&sample_model(), &path).unwrap();
        let content = std::fs::read_to_string(&path).unwrap();
        let cut = content.len() / 2;
        std::fs::write(&path, &content[..cut]).unwrap();
        match load_artifact(&path) {
            Err(DeployError::Format { offset, .. }) => {
                assert!(offset > 0 && offset <= cut, "offset {offset} vs cut {cut}");
            }
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn mismatched_parameters_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.zmodel");
        let mut artifact = artifact_from_model(&sample_model());
        artifact.parameters = ModelParams::Ridge(RidgeParams { weights: vec![1.0] });
        std::fs::write(&path, serde_json::to_string_pretty(&artifact).unwrap()).unwrap();
        match load_artifact(&path) {
            Err(DeployError::Format { message, .. }) => {
                assert!(message.contains("do not match"));
            }
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(
            load_artifact(Path::new("/no/such/artifact.zmodel")),
            Err(DeployError::Io(_))
        ));
    }
}
