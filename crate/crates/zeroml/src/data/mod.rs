//! Column-oriented datasets: CSV ingestion with type inference, cleaning,
//! feature-schema fitting and k-fold construction.
//!
//! Datasets are immutable once built; every transformation returns a new
//! dataset, and both datasets and fitted schemas are safe to share across
//! search workers.

mod clean;
mod csv_io;
mod folds;
mod schema;

pub use clean::clean;
pub use csv_io::{load_csv, write_csv};
pub use folds::{kfold, FoldPlan};
pub use schema::{
    apply_schema, encode_cell, fit_schema, select_rows, ColumnTransform, FeatureSchema, Matrix,
    Preprocess, TargetKind, TargetValues, Task, UNSEEN_CLASS,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("csv error at line {row}: {message}")]
    Csv { row: u64, message: String },
    #[error("clean error: {0}")]
    Clean(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("fold error: {0}")]
    Fold(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnType {
    Numeric,
    Categorical,
    Boolean,
}

#[derive(Debug, Clone)]
pub enum ColumnData {
    /// Finite values; rows flagged missing hold 0.0.
    Numeric(Vec<f64>),
    /// Interned level codes (first-appearance order); missing rows hold 0.
    Categorical { codes: Vec<u32>, levels: Vec<String> },
    Boolean(Vec<bool>),
}

#[derive(Debug, Clone)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
    pub missing: Vec<bool>,
}

/// A borrowed view of one cell, independent of column storage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell<'a> {
    Missing,
    Num(f64),
    Str(&'a str),
    Bool(bool),
}

impl Column {
    pub fn ctype(&self) -> ColumnType {
        match self.data {
            ColumnData::Numeric(_) => ColumnType::Numeric,
            ColumnData::Categorical { .. } => ColumnType::Categorical,
            ColumnData::Boolean(_) => ColumnType::Boolean,
        }
    }

    pub fn len(&self) -> usize {
        self.missing.len()
    }

    pub fn is_empty(&self) -> bool {
        self.missing.is_empty()
    }

    pub fn missing_count(&self) -> usize {
        self.missing.iter().filter(|&&m| m).count()
    }

    pub fn cell(&self, row: usize) -> Cell<'_> {
        if self.missing[row] {
            return Cell::Missing;
        }
        match &self.data {
            ColumnData::Numeric(values) => Cell::Num(values[row]),
            ColumnData::Categorical { codes, levels } => Cell::Str(&levels[codes[row] as usize]),
            ColumnData::Boolean(values) => Cell::Bool(values[row]),
        }
    }

    /// Canonical text form of a cell (numbers use shortest round-trip
    /// formatting); None when missing.
    pub fn cell_string(&self, row: usize) -> Option<String> {
        match self.cell(row) {
            Cell::Missing => None,
            Cell::Num(v) => Some(format_number(v)),
            Cell::Str(s) => Some(s.to_string()),
            Cell::Bool(b) => Some(b.to_string()),
        }
    }

    /// Distinct non-missing values, as canonical strings.
    pub fn distinct_values(&self) -> Vec<String> {
        let mut seen = std::collections::BTreeSet::new();
        for row in 0..self.len() {
            if let Some(s) = self.cell_string(row) {
                seen.insert(s);
            }
        }
        seen.into_iter().collect()
    }
}

/// Shortest round-trip decimal form (Rust's f64 Display), shared by CSV
/// output, one-hot level naming and prediction rendering.
pub fn format_number(v: f64) -> String {
    format!("{v}")
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub columns: Vec<Column>,
    pub n_rows: usize,
}

impl Dataset {
    pub fn new(columns: Vec<Column>, n_rows: usize) -> Self {
        debug_assert!(columns.iter().all(|c| c.len() == n_rows));
        Dataset { columns, n_rows }
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    /// One-line summary used by `print`.
    pub fn summary(&self) -> String {
        format!("Dataset({} rows x {} cols)", self.n_rows, self.n_cols())
    }
}

/// Build a categorical column from raw strings (used by loading and tests).
pub(crate) fn categorical_from_strings(name: &str, cells: &[Option<String>]) -> Column {
    let mut levels: Vec<String> = Vec::new();
    let mut codes = Vec::with_capacity(cells.len());
    let mut missing = Vec::with_capacity(cells.len());
    for cell in cells {
        match cell {
            None => {
                codes.push(0);
                missing.push(true);
            }
            Some(s) => {
                let code = match levels.iter().position(|l| l == s) {
                    Some(i) => i as u32,
                    None => {
                        levels.push(s.clone());
                        (levels.len() - 1) as u32
                    }
                };
                codes.push(code);
                missing.push(false);
            }
        }
    }
    Column {
        name: name.to_string(),
        data: ColumnData::Categorical { codes, levels },
        missing,
    }
}
