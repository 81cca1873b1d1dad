//! Numeric CSV ingestion and emission.
//!
//! Floats are written in Rust's shortest round-trip decimal form, so a save
//! followed by a load reproduces every value bit for bit.

use std::path::Path;

use ordr2_core::{Column, Dataset};

use crate::error::CliError;
use crate::sensory::MARKER_COLUMN;

/// A plain numeric table, column major.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
    }
}

/// Shortest decimal that parses back to the identical f64.
pub fn fmt_float(v: f64) -> String {
    format!("{v}")
}

/// Read a UTF-8 CSV with a header row and numeric cells. Parse failures cite
/// the 1-based data row (header excluded) and the column name.
pub fn read_table(path: &Path) -> Result<Table, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|source| CliError::Csv { path: path.into(), source })?;
    let names: Vec<String> = reader
        .headers()
        .map_err(|source| CliError::Csv { path: path.into(), source })?
        .iter()
        .map(str::to_owned)
        .collect();
    if names.is_empty() {
        return Err(CliError::EmptyFile { path: path.into() });
    }
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(|source| CliError::Csv { path: path.into(), source })?;
        if record.len() != names.len() {
            return Err(CliError::Parse {
                path: path.into(),
                row,
                column: String::from("<record>"),
                detail: format!("expected {} fields, found {}", names.len(), record.len()),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            let value: f64 = cell.parse().map_err(|_| CliError::Parse {
                path: path.into(),
                row,
                column: names[j].clone(),
                detail: format!("non-numeric cell '{cell}'"),
            })?;
            if !value.is_finite() {
                return Err(CliError::Parse {
                    path: path.into(),
                    row,
                    column: names[j].clone(),
                    detail: format!("non-finite cell '{cell}'"),
                });
            }
            columns[j].push(value);
        }
    }
    if columns[0].is_empty() {
        return Err(CliError::EmptyFile { path: path.into() });
    }
    Ok(Table { names, columns })
}

pub fn write_table(path: &Path, table: &Table) -> Result<(), CliError> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|source| CliError::Csv { path: path.into(), source })?;
    writer
        .write_record(&table.names)
        .map_err(|source| CliError::Csv { path: path.into(), source })?;
    for i in 0..table.n_rows() {
        let record: Vec<String> = table.columns.iter().map(|c| fmt_float(c[i])).collect();
        writer
            .write_record(&record)
            .map_err(|source| CliError::Csv { path: path.into(), source })?;
    }
    writer
        .flush()
        .map_err(|source| CliError::Io { path: path.into(), source })?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResponseKind {
    Linear,
    Binary,
    Ordinal,
}

/// Load a modeling dataset: the named response column plus every other
/// column, in file order, as predictors. The preprocessing marker column is
/// never treated as a predictor. Binary/ordinal responses must be integer
/// codes starting at 1 (binary: exactly 1 and 2).
pub fn load_csv(
    path: &Path,
    response_column: &str,
    kind: ResponseKind,
) -> Result<Dataset, CliError> {
    let table = read_table(path)?;
    let response_idx = table
        .names
        .iter()
        .position(|n| n == response_column)
        .ok_or_else(|| CliError::MissingColumn {
            path: path.into(),
            column: response_column.to_owned(),
        })?;

    let columns: Vec<Column> = table
        .names
        .iter()
        .zip(&table.columns)
        .enumerate()
        .filter(|&(j, (name, _))| j != response_idx && name != MARKER_COLUMN)
        .map(|(_, (name, values))| Column::new(name.clone(), values.clone()))
        .collect();
    let response = &table.columns[response_idx];

    match kind {
        ResponseKind::Linear => {
            Ok(Dataset::new_continuous(columns, response.clone())?)
        }
        ResponseKind::Binary | ResponseKind::Ordinal => {
            let mut codes = Vec::with_capacity(response.len());
            for (idx, &v) in response.iter().enumerate() {
                let ok = v.fract() == 0.0 && v >= 1.0 && v <= u32::MAX as f64;
                if !ok {
                    return Err(CliError::Parse {
                        path: path.into(),
                        row: idx + 1,
                        column: response_column.to_owned(),
                        detail: format!("ordinal code must be an integer >= 1, got '{v}'"),
                    });
                }
                codes.push(v as u32);
            }
            let max = codes.iter().copied().max().unwrap_or(0);
            if kind == ResponseKind::Binary && max > 2 {
                return Err(CliError::InvalidArg(format!(
                    "binary response must use codes 1 and 2, found {max}"
                )));
            }
            let n_categories = if kind == ResponseKind::Binary { 2 } else { max.max(2) };
            Ok(Dataset::new_ordinal(columns, codes, n_categories)?)
        }
    }
}
