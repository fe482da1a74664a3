//! Dataset cleaning: drop mostly-missing columns, impute the rest.
//!
//! Columns with more than 50% missing cells are dropped. Remaining numeric
//! gaps are imputed with the column mean over non-missing values;
//! categorical and boolean gaps with the mode (ties break to the
//! lexicographically smallest value). Cleaning an already-clean dataset is
//! a no-op, so `clean` is idempotent.

use super::{Column, ColumnData, DataError, Dataset};

pub fn clean(dataset: &Dataset) -> Result<Dataset, DataError> {
    let n = dataset.n_rows;
    let mut columns = Vec::new();
    for col in &dataset.columns {
        let missing = col.missing_count();
        if n > 0 && (missing as f64) / (n as f64) > 0.5 {
            continue;
        }
        columns.push(impute(col));
    }
    if columns.is_empty() && !dataset.columns.is_empty() {
        return Err(DataError::Clean(
            "every column would be dropped (all are more than 50% missing)".to_string(),
        ));
    }
    Ok(Dataset::new(columns, n))
}

fn impute(col: &Column) -> Column {
    if col.missing_count() == 0 {
        return col.clone();
    }
    let data = match &col.data {
        ColumnData::Numeric(values) => {
            let present: Vec<f64> = values
                .iter()
                .zip(&col.missing)
                .filter(|(_, &m)| !m)
                .map(|(v, _)| *v)
                .collect();
            let mean = if present.is_empty() {
                0.0
            } else {
                present.iter().sum::<f64>() / present.len() as f64
            };
            ColumnData::Numeric(
                values
                    .iter()
                    .zip(&col.missing)
                    .map(|(v, &m)| if m { mean } else { *v })
                    .collect(),
            )
        }
        ColumnData::Categorical { codes, levels } => {
            let mut counts = vec![0usize; levels.len()];
            for (code, &m) in codes.iter().zip(&col.missing) {
                if !m {
                    counts[*code as usize] += 1;
                }
            }
            // Mode; ties break to the lexicographically smallest level.
            let mode = (0..levels.len())
                .max_by(|&a, &b| {
                    counts[a]
                        .cmp(&counts[b])
                        .then_with(|| levels[b].cmp(&levels[a]))
                })
                .unwrap_or(0) as u32;
            ColumnData::Categorical {
                codes: codes
                    .iter()
                    .zip(&col.missing)
                    .map(|(c, &m)| if m { mode } else { *c })
                    .collect(),
                levels: levels.clone(),
            }
        }
        ColumnData::Boolean(values) => {
            let mut true_count = 0usize;
            let mut false_count = 0usize;
            for (v, &m) in values.iter().zip(&col.missing) {
                if !m {
                    if *v {
                        true_count += 1;
                    } else {
                        false_count += 1;
                    }
                }
            }
            // Tie breaks to false ("false" < "true").
            let mode = true_count > false_count;
            ColumnData::Boolean(
                values
                    .iter()
                    .zip(&col.missing)
                    .map(|(v, &m)| if m { mode } else { *v })
                    .collect(),
            )
        }
    };
    Column {
        name: col.name.clone(),
        data,
        missing: vec![false; col.len()],
    }
}
