//! CSV ingestion (RFC-4180 subset: comma delimiter, double-quote quoting,
//! first row is the header) and CSV output for prediction results.
//!
//! Cells are trimmed before type inference. A column is Numeric iff every
//! non-missing trimmed cell parses as a finite number, Boolean iff all are
//! `true`/`false` case-insensitively, Categorical otherwise. Empty cells
//! are missing.

use std::collections::HashSet;
use std::fs::File;
use std::io::Write;
use std::path::Path;

use super::{categorical_from_strings, Cell, Column, ColumnData, DataError, Dataset};

pub fn load_csv(path: &Path) -> Result<Dataset, DataError> {
    let file = File::open(path).map_err(|e| {
        DataError::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {}", path.display(), e),
        ))
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(file);

    let headers: Vec<String> = reader
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
        return Err(DataError::Csv {
            row: 1,
            message: "missing header row".to_string(),
        });
    }
    let mut seen = HashSet::new();
    for header in &headers {
        if !seen.insert(header.clone()) {
            return Err(DataError::Csv {
                row: 1,
                message: format!("duplicate header '{header}'"),
            });
        }
    }

    let mut cells: Vec<Vec<Option<String>>> = vec![Vec::new(); headers.len()];
    let mut n_rows = 0usize;
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        for (i, field) in record.iter().enumerate() {
            let trimmed = field.trim();
            cells[i].push(if trimmed.is_empty() {
                None
            } else {
                Some(trimmed.to_string())
            });
        }
        n_rows += 1;
    }

    let columns = headers
        .into_iter()
        .zip(cells)
        .map(|(name, cells)| infer_column(&name, &cells))
        .collect();
    Ok(Dataset::new(columns, n_rows))
}

fn csv_error(e: csv::Error) -> DataError {
    let row = match e.position() {
        Some(pos) => pos.line(),
        None => 0,
    };
    DataError::Csv {
        row,
        message: e.to_string(),
    }
}

fn infer_column(name: &str, cells: &[Option<String>]) -> Column {
    let present: Vec<&String> = cells.iter().flatten().collect();

    let as_numbers: Option<Vec<f64>> = present
        .iter()
        .map(|s| s.parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect();
    if let Some(numbers) = as_numbers {
        let mut iter = numbers.into_iter();
        let values = cells
            .iter()
            .map(|c| if c.is_some() { iter.next().unwrap() } else { 0.0 })
            .collect();
        return Column {
            name: name.to_string(),
            data: ColumnData::Numeric(values),
            missing: cells.iter().map(|c| c.is_none()).collect(),
        };
    }

    let all_bool = !present.is_empty()
        && present
            .iter()
            .all(|s| s.eq_ignore_ascii_case("true") || s.eq_ignore_ascii_case("false"));
    if all_bool {
        let values = cells
            .iter()
            .map(|c| matches!(c, Some(s) if s.eq_ignore_ascii_case("true")))
            .collect();
        return Column {
            name: name.to_string(),
            data: ColumnData::Boolean(values),
            missing: cells.iter().map(|c| c.is_none()).collect(),
        };
    }

    categorical_from_strings(name, cells)
}

/// Write a dataset as CSV (header + rows); missing cells become empty.
pub fn write_csv(dataset: &Dataset, out: &mut dyn Write) -> Result<(), DataError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(dataset.columns.iter().map(|c| c.name.as_str()))
        .map_err(csv_error)?;
    for row in 0..dataset.n_rows {
        let record: Vec<String> = dataset
            .columns
            .iter()
            .map(|c| match c.cell(row) {
                Cell::Missing => String::new(),
                _ => c.cell_string(row).unwrap_or_default(),
            })
            .collect();
        writer.write_record(&record).map_err(csv_error)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| DataError::Csv { row: 0, message: e.to_string() })?;
    out.write_all(&bytes)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ColumnType;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn loads_and_infers_types() {
        let f = write_temp("a,b\n1,x\n2,y\n3,x\n");
        let d = load_csv(f.path()).unwrap();
        assert_eq!(d.n_rows, 3);
        assert_eq!(d.n_cols(), 2);
        assert_eq!(d.column("a").unwrap().ctype(), ColumnType::Numeric);
        assert_eq!(d.column("b").unwrap().ctype(), ColumnType::Categorical);
    }

    #[test]
    fn empty_cells_are_missing() {
        let f = write_temp("a,b\n1,\n2,y\n");
        let d = load_csv(f.path()).unwrap();
        let b = d.column("b").unwrap();
        assert!(b.missing[0]);
        assert!(!b.missing[1]);
        assert_eq!(b.missing_count(), 1);
    }

    #[test]
    fn any_non_numeric_token_demotes_to_categorical() {
        let f = write_temp("a\n1\n2.5\noops\n");
        let d = load_csv(f.path()).unwrap();
        assert_eq!(d.column("a").unwrap().ctype(), ColumnType::Categorical);
    }

    #[test]
    fn boolean_column_inference() {
        let f = write_temp("flag\ntrue\nFalse\nTRUE\n");
        let d = load_csv(f.path()).unwrap();
        assert_eq!(d.column("flag").unwrap().ctype(), ColumnType::Boolean);
    }

    #[test]
    fn whitespace_is_trimmed_before_inference() {
        let f = write_temp("a\n 1 \n 2\n");
        let d = load_csv(f.path()).unwrap();
        assert_eq!(d.column("a").unwrap().ctype(), ColumnType::Numeric);
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = load_csv(Path::new("/nonexistent/x.csv")).unwrap_err();
        assert!(matches!(err, DataError::Io(_)));
    }

    #[test]
    fn ragged_row_is_csv_error_with_row() {
        let f = write_temp("a,b\n1,2\n3\n");
        let err = load_csv(f.path()).unwrap_err();
        match err {
            DataError::Csv { row, .. } => assert_eq!(row, 3),
            other => panic!("expected Csv error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_header_rejected() {
        let f = write_temp("a,a\n1,2\n");
        let err = load_csv(f.path()).unwrap_err();
        assert!(matches!(err, DataError::Csv { .. }));
        assert!(err.to_string().contains("duplicate header"));
    }

    #[test]
    fn quoted_fields_with_commas() {
        let f = write_temp("a,b\n\"x, y\",1\n");
        let d = load_csv(f.path()).unwrap();
        assert_eq!(d.column("a").unwrap().cell_string(0).unwrap(), "x, y");
    }

    #[test]
    fn nan_and_inf_tokens_are_not_numeric() {
        let f = write_temp("a\n1\ninf\nNaN\n");
        let d = load_csv(f.path()).unwrap();
        assert_eq!(d.column("a").unwrap().ctype(), ColumnType::Categorical);
    }

    #[test]
    fn csv_roundtrip() {
        let f = write_temp("a,b\n1,x\n2.5,y\n,z\n");
        let d = load_csv(f.path()).unwrap();
        let mut out = Vec::new();
        write_csv(&d, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "a,b\n1,x\n2.5,y\n,z\n");
    }
}
