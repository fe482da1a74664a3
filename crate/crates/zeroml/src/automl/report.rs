//! Report rendering (fixed-width table) and the versioned machine-readable
//! report file consumed by `--report-out` and the serving `/report`
//! endpoint. In test mode every wall-clock field renders as zero so output
//! bytes are stable across runs and thread counts.

use serde::{Deserialize, Serialize};

use crate::data::Task;

use super::metrics::Metric;
use super::{CandidateResult, CandidateStatus, Report};

pub const REPORT_FORMAT_VERSION: u32 = 1;

/// Render the fixed-width report table. Rows are ranked by score (the
/// underlying data model stays in candidate-index order); the best row is
/// marked `*`; candidates that never ran show `-` placeholders.
pub fn render_report(report: &Report, test_mode: bool) -> String {
    let mut out = String::new();
    out.push_str("== AutoML Report ==\n");
    out.push_str(&format!(
        "task: {} | metric: {} | rows: {} | features: {} | folds: {} | seed: {} | roster: v{}\n",
        report.task.name(),
        report.metric.name(),
        report.dataset_rows,
        report.dataset_features,
        report.folds,
        report.seed,
        report.roster_version,
    ));
    if report.stratification_warning {
        out.push_str("note: stratification degenerated to plain folds (singleton class)\n");
    }
    out.push('\n');
    out.push_str(&format!(
        "{:<6}{:<24}{:<15}{:<20}{:<9}{}\n",
        "rank", "model", "hyperparams", "mean \u{b1} std", "fit_s", "status"
    ));

    let mut order: Vec<&CandidateResult> = report.rows.iter().collect();
    order.sort_by(|a, b| {
        use std::cmp::Ordering;
        match (&a.status, &b.status) {
            (CandidateStatus::Done, CandidateStatus::Done) => {
                let (am, bm) = (a.mean_score.unwrap_or(0.0), b.mean_score.unwrap_or(0.0));
                let by_score = if report.metric.higher_is_better() {
                    bm.partial_cmp(&am).unwrap_or(Ordering::Equal)
                } else {
                    am.partial_cmp(&bm).unwrap_or(Ordering::Equal)
                };
                by_score.then(a.candidate.index.cmp(&b.candidate.index))
            }
            (CandidateStatus::Done, _) => Ordering::Less,
            (_, CandidateStatus::Done) => Ordering::Greater,
            _ => a.candidate.index.cmp(&b.candidate.index),
        }
    });

    let mut rank = 0usize;
    for row in order {
        let rank_cell = match row.status {
            CandidateStatus::Done => {
                rank += 1;
                let marker = if row.candidate.index == report.best_index { "*" } else { " " };
                format!("{rank:>3}{marker} ")
            }
            _ => format!("{:>3}  ", "-"),
        };
        let score_cell = match (row.mean_score, row.std_score) {
            (Some(mean), Some(std)) => format!("{mean:.4} \u{b1} {std:.4}"),
            _ => "-".to_string(),
        };
        let fit_cell = match row.status {
            CandidateStatus::Done if !test_mode => format!("{:.3}", row.fit_seconds),
            CandidateStatus::Done => "0.000".to_string(),
            _ => "-".to_string(),
        };
        let status_cell = match &row.status {
            CandidateStatus::Done => "done".to_string(),
            CandidateStatus::SkippedDeadline => "skipped (deadline)".to_string(),
            CandidateStatus::Failed(msg) => format!("failed ({msg})"),
        };
        out.push_str(&format!(
            "{:<6}{:<24}{:<15}{:<20}{:<9}{}\n",
            rank_cell,
            row.candidate.config.kind_name(),
            row.candidate.config.hyperparams_label(),
            score_cell,
            fit_cell,
            status_cell,
        ));
    }

    let wall = if test_mode { 0.0 } else { report.total_wall_seconds };
    out.push_str(&format!("total wall seconds: {wall:.3}\n"));
    out
}

/// Versioned machine-readable form: the same content as the rendered table
/// plus the raw per-fold numbers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportFile {
    pub format_version: u32,
    pub task: Task,
    pub metric: Metric,
    pub rows: usize,
    pub features: usize,
    pub folds: usize,
    pub seed: u64,
    pub threads: usize,
    pub roster_version: u32,
    pub total_wall_seconds: f64,
    pub best_index: usize,
    pub stratification_warning: bool,
    pub candidates: Vec<CandidateRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CandidateRow {
    pub index: usize,
    pub model_kind: String,
    pub hyperparams: serde_json::Value,
    pub status: String,
    pub error: Option<String>,
    pub fold_scores: Vec<f64>,
    pub mean_score: Option<f64>,
    pub std_score: Option<f64>,
    pub fit_seconds: f64,
}

pub fn report_json(report: &Report, test_mode: bool) -> ReportFile {
    ReportFile {
        format_version: REPORT_FORMAT_VERSION,
        task: report.task,
        metric: report.metric,
        rows: report.dataset_rows,
        features: report.dataset_features,
        folds: report.folds,
        seed: report.seed,
        threads: report.threads,
        roster_version: report.roster_version,
        total_wall_seconds: if test_mode { 0.0 } else { report.total_wall_seconds },
        best_index: report.best_index,
        stratification_warning: report.stratification_warning,
        candidates: report
            .rows
            .iter()
            .map(|row| CandidateRow {
                index: row.candidate.index,
                model_kind: row.candidate.config.kind_name().to_string(),
                hyperparams: row.candidate.config.hyperparams_json(),
                status: row.status.label().to_string(),
                error: match &row.status {
                    CandidateStatus::Failed(msg) => Some(msg.clone()),
                    _ => None,
                },
                fold_scores: row.fold_scores.clone(),
                mean_score: row.mean_score,
                std_score: row.std_score,
                fit_seconds: if test_mode { 0.0 } else { row.fit_seconds },
            })
            .collect(),
    }
}
