//! Feature engineering: fit a schema on training rows, then apply it to any
//! dataset. The fitted schema freezes every training-time statistic
//! (means, stds, category lists), which is exactly what ships inside a
//! deployment artifact — applying a schema never recomputes statistics.

use serde::{Deserialize, Serialize};

use super::{Cell, ColumnType, DataError, Dataset};

/// Sentinel class index for a target value not present in the fitted class
/// list (possible on held-out folds); never equal to any prediction.
pub const UNSEEN_CLASS: usize = usize::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Classification,
    Regression,
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Classification => "classification",
            Task::Regression => "regression",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preprocess {
    Standard,
    None,
}

impl Preprocess {
    pub fn parse(s: &str) -> Result<Preprocess, DataError> {
        match s {
            "standard" => Ok(Preprocess::Standard),
            "none" => Ok(Preprocess::None),
            other => Err(DataError::Schema(format!(
                "unsupported preprocess '{other}' (expected \"standard\" or \"none\")"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColumnTransform {
    /// (x - mean) / std with population std; std == 0 divides by 1.
    Standardize { mean: f64, std: f64 },
    /// One indicator column per category; categories sorted
    /// lexicographically; unseen levels encode as all zeros.
    OneHot { categories: Vec<String> },
    Passthrough,
}

impl ColumnTransform {
    pub fn width(&self) -> usize {
        match self {
            ColumnTransform::OneHot { categories } => categories.len(),
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetKind {
    Classes { classes: Vec<String> },
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub input_columns: Vec<String>,
    pub transforms: Vec<ColumnTransform>,
    pub target_name: String,
    pub target_kind: TargetKind,
}

impl FeatureSchema {
    pub fn n_features(&self) -> usize {
        self.transforms.iter().map(|t| t.width()).sum()
    }

    pub fn classes(&self) -> Option<&[String]> {
        match &self.target_kind {
            TargetKind::Classes { classes } => Some(classes),
            TargetKind::Numeric => None,
        }
    }
}

/// Dense row-major numeric matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Self {
        let n = rows.len();
        let cols = rows.first().map(|r| r.len()).unwrap_or(0);
        debug_assert!(rows.iter().all(|r| r.len() == cols));
        Matrix {
            rows: n,
            cols,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TargetValues {
    /// Class indices into the schema's class list; [`UNSEEN_CLASS`] marks a
    /// value outside it.
    Classes(Vec<usize>),
    Numeric(Vec<f64>),
}

impl TargetValues {
    pub fn len(&self) -> usize {
        match self {
            TargetValues::Classes(v) => v.len(),
            TargetValues::Numeric(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Restrict to the given row positions.
    pub fn select(&self, rows: &[usize]) -> TargetValues {
        match self {
            TargetValues::Classes(v) => TargetValues::Classes(rows.iter().map(|&r| v[r]).collect()),
            TargetValues::Numeric(v) => TargetValues::Numeric(rows.iter().map(|&r| v[r]).collect()),
        }
    }
}

/// Fit preprocessing on a dataset. With `Preprocess::Standard`, numeric
/// columns standardize; with `Preprocess::None` they pass through.
/// Categorical and boolean columns always one-hot encode. The target column
/// is excluded from the features.
pub fn fit_schema(
    dataset: &Dataset,
    target: &str,
    preprocess: Preprocess,
    task: Task,
) -> Result<FeatureSchema, DataError> {
    let target_col = dataset
        .column(target)
        .ok_or_else(|| DataError::Schema(format!("unknown target column '{target}'")))?;

    let target_kind = match task {
        Task::Regression => {
            if target_col.ctype() != ColumnType::Numeric {
                return Err(DataError::Schema(format!(
                    "regression target '{target}' must be numeric"
                )));
            }
            TargetKind::Numeric
        }
        Task::Classification => TargetKind::Classes {
            classes: target_classes(target_col),
        },
    };

    let mut input_columns = Vec::new();
    let mut transforms = Vec::new();
    for col in &dataset.columns {
        if col.name == target {
            continue;
        }
        let transform = match col.ctype() {
            ColumnType::Numeric => match preprocess {
                Preprocess::Standard => {
                    let (mean, std) = mean_and_population_std(col);
                    ColumnTransform::Standardize { mean, std }
                }
                Preprocess::None => ColumnTransform::Passthrough,
            },
            ColumnType::Categorical | ColumnType::Boolean => ColumnTransform::OneHot {
                categories: col.distinct_values(),
            },
        };
        input_columns.push(col.name.clone());
        transforms.push(transform);
    }

    Ok(FeatureSchema {
        input_columns,
        transforms,
        target_name: target.to_string(),
        target_kind,
    })
}

fn target_classes(col: &super::Column) -> Vec<String> {
    match &col.data {
        // Numeric classification targets sort by value, not lexicographically.
        super::ColumnData::Numeric(values) => {
            let mut distinct: Vec<f64> = values
                .iter()
                .zip(&col.missing)
                .filter(|(_, &m)| !m)
                .map(|(v, _)| *v)
                .collect();
            distinct.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
            distinct.dedup();
            distinct.into_iter().map(super::format_number).collect()
        }
        _ => col.distinct_values(),
    }
}

fn mean_and_population_std(col: &super::Column) -> (f64, f64) {
    let values: Vec<f64> = (0..col.len())
        .filter_map(|row| match col.cell(row) {
            Cell::Num(v) => Some(v),
            _ => None,
        })
        .collect();
    if values.is_empty() {
        return (0.0, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Encode one cell under a transform, appending its feature block to `out`.
/// Missing numeric cells encode as the stored mean (i.e. 0 after
/// standardization) or 0.0 under passthrough; missing or unseen categorical
/// cells encode as an all-zero block.
pub fn encode_cell(transform: &ColumnTransform, cell: Cell<'_>, out: &mut Vec<f64>) -> Result<(), DataError> {
    match transform {
        ColumnTransform::Standardize { mean, std } => {
            let v = cell_number(cell)?.unwrap_or(*mean);
            let div = if *std == 0.0 { 1.0 } else { *std };
            out.push((v - mean) / div);
        }
        ColumnTransform::Passthrough => {
            out.push(cell_number(cell)?.unwrap_or(0.0));
        }
        ColumnTransform::OneHot { categories } => {
            let start = out.len();
            out.resize(start + categories.len(), 0.0);
            if let Some(s) = cell_text(cell) {
                if let Ok(pos) = categories.binary_search(&s) {
                    out[start + pos] = 1.0;
                }
            }
        }
    }
    Ok(())
}

fn cell_number(cell: Cell<'_>) -> Result<Option<f64>, DataError> {
    match cell {
        Cell::Missing => Ok(None),
        Cell::Num(v) => Ok(Some(v)),
        Cell::Bool(b) => Ok(Some(if b { 1.0 } else { 0.0 })),
        Cell::Str(s) => match s.trim().parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Some(v)),
            _ => Err(DataError::Schema(format!(
                "expected a numeric value, got '{s}'"
            ))),
        },
    }
}

fn cell_text(cell: Cell<'_>) -> Option<String> {
    match cell {
        Cell::Missing => None,
        Cell::Num(v) => Some(super::format_number(v)),
        Cell::Bool(b) => Some(b.to_string()),
        Cell::Str(s) => Some(s.trim().to_string()),
    }
}

/// Transform a dataset with a fitted schema. Returns the feature matrix
/// and, when the target column is present, the target values.
pub fn apply_schema(
    schema: &FeatureSchema,
    dataset: &Dataset,
) -> Result<(Matrix, Option<TargetValues>), DataError> {
    let missing: Vec<&str> = schema
        .input_columns
        .iter()
        .filter(|name| dataset.column(name).is_none())
        .map(|s| s.as_str())
        .collect();
    if !missing.is_empty() {
        return Err(DataError::Schema(format!(
            "missing columns: {}",
            missing.join(", ")
        )));
    }

    let cols: Vec<&super::Column> = schema
        .input_columns
        .iter()
        .map(|name| dataset.column(name).expect("checked above"))
        .collect();

    let mut data = Vec::with_capacity(dataset.n_rows * schema.n_features());
    for row in 0..dataset.n_rows {
        for (col, transform) in cols.iter().zip(&schema.transforms) {
            encode_cell(transform, col.cell(row), &mut data)?;
        }
    }
    let matrix = Matrix {
        rows: dataset.n_rows,
        cols: schema.n_features(),
        data,
    };

    let target = match dataset.column(&schema.target_name) {
        None => None,
        Some(col) => Some(extract_target(schema, col)?),
    };
    Ok((matrix, target))
}

fn extract_target(schema: &FeatureSchema, col: &super::Column) -> Result<TargetValues, DataError> {
    match &schema.target_kind {
        TargetKind::Classes { classes } => {
            let mut out = Vec::with_capacity(col.len());
            for row in 0..col.len() {
                let idx = match cell_text(col.cell(row)) {
                    None => UNSEEN_CLASS,
                    Some(s) => classes.iter().position(|c| *c == s).unwrap_or(UNSEEN_CLASS),
                };
                out.push(idx);
            }
            Ok(TargetValues::Classes(out))
        }
        TargetKind::Numeric => {
            let mut out = Vec::with_capacity(col.len());
            for row in 0..col.len() {
                out.push(cell_number(col.cell(row))?.unwrap_or(f64::NAN));
            }
            Ok(TargetValues::Numeric(out))
        }
    }
}

/// Restrict a dataset to the given rows (fold construction).
pub fn select_rows(dataset: &Dataset, rows: &[usize]) -> Dataset {
    let columns = dataset
        .columns
        .iter()
        .map(|col| {
            let data = match &col.data {
                super::ColumnData::Numeric(v) => {
                    super::ColumnData::Numeric(rows.iter().map(|&r| v[r]).collect())
                }
                super::ColumnData::Categorical { codes, levels } => super::ColumnData::Categorical {
                    codes: rows.iter().map(|&r| codes[r]).collect(),
                    levels: levels.clone(),
                },
                super::ColumnData::Boolean(v) => {
                    super::ColumnData::Boolean(rows.iter().map(|&r| v[r]).collect())
                }
            };
            super::Column {
                name: col.name.clone(),
                data,
                missing: rows.iter().map(|&r| col.missing[r]).collect(),
            }
        })
        .collect();
    Dataset::new(columns, rows.len())
}
